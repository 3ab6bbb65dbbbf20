// tdec: rank-1 decompositions of partially symmetric tensors.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tdec/decompose.hpp"
#include "tdec/io.hpp"
#include "tdec/moment.hpp"

using namespace tdec;

namespace {

bool log_enabled()
{
    const char* v = std::getenv("TDEC_LOG");
    if (!v)
        return false;
    std::string s(v);
    return s == "debug" || s == "info";
}

std::string shape_text(const Shape& s)
{
    std::ostringstream os;
    for (int g = 0; g < s.k(); ++g)
        os << (g ? " x " : "") << s.dims[g] + 1;
    os << " (degrees";
    for (int d : s.degrees)
        os << " " << d;
    os << ")";
    return os.str();
}

std::string cplx_text(cplx c, bool complex)
{
    std::ostringstream os;
    os.precision(10);
    if (!complex)
        os << c.real();
    else
        os << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i";
    return os.str();
}

bool has_imaginary(const std::vector<Term>& terms)
{
    for (const auto& t : terms) {
        if (t.weight.imag() != 0.0)
            return true;
        for (const auto& g : t.point.coords)
            for (cplx c : g)
                if (c.imag() != 0.0)
                    return true;
    }
    return false;
}

std::string fmt_term(const Term& t, bool complex)
{
    std::ostringstream os;
    os << cplx_text(t.weight, complex) << " *";
    for (const auto& g : t.point.coords) {
        os << " (";
        for (size_t l = 0; l < g.size(); ++l)
            os << (l ? ", " : "") << cplx_text(g[l], complex);
        os << ")";
    }
    return os.str();
}

TensorFile load_tensor(const std::string& path)
{
    std::string text = read_file(path);
    try {
        return parse_tensor_file(text);
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
}

struct DecomposeArgs {
    std::string input, output, field;
    int max_rank = 0;
    double tol_rank = 1e-8, tol_resid = 1e-6;
    std::uint64_t seed = 0;
    bool reduce = false, verbose = false, reproducible = false;
};

int cmd_decompose(const DecomposeArgs& a)
{
    TensorFile tf;
    try {
        tf = load_tensor(a.input);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    DecomposeOptions opt;
    opt.max_rank = a.max_rank;
    opt.tol_rank = a.tol_rank;
    opt.tol_resid = a.tol_resid;
    opt.seed = a.seed;
    opt.reduce = a.reduce;
    if (a.verbose || log_enabled())
        opt.log = [](const std::string& m) { std::cerr << "[tdec] " << m << "\n"; };

    auto t0 = std::chrono::steady_clock::now();
    DecomposeReport rep;
    try {
        rep = decompose(tf.tensor, opt);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    DecompositionFile out;
    out.terms = rep.dec.terms;
    bool complex = tf.field == Field::Complex || has_imaginary(out.terms);
    if (a.field == "real")
        complex = false;
    else if (a.field == "complex")
        complex = true;
    out.field = complex ? Field::Complex : Field::Real;
    out.residual = rep.ok ? rep.dec.residual : std::max(rep.best_residual, 0.0);
    out.meta.seed = a.seed;
    out.meta.tol_rank = a.tol_rank;
    out.meta.tol_resid = a.tol_resid;
    out.meta.bounds = rep.bounds;
    out.meta.coordinate_change_applied = rep.dec.coordinate_change;
    out.meta.elapsed_ms = a.reproducible ? 0.0 : std::round(ms * 1000.0) / 1000.0;
    out.meta.reduced = rep.reduced;
    out.meta.reduced_dims = rep.reduced_dims;
    out.meta.status = rep.ok ? "ok" : "no-decomposition";
    out.meta.diagnostics = rep.diagnostics;
    if (!rep.ok)
        out.terms.clear();

    const Shape& s = tf.tensor.shape;
    std::cout << "tensor " << shape_text(s) << "\n";
    std::cout << "bounds: lower " << rep.bounds.lower << ", upper " << rep.bounds.upper
              << ", expected " << rep.bounds.expected << ", kruskal " << rep.bounds.kruskal << "\n";
    if (rep.reduced) {
        std::cout << "reduced to";
        for (int d : rep.reduced_dims)
            std::cout << " " << d;
        std::cout << "\n";
    }
    if (rep.ok) {
        std::cout << "rank " << out.rank() << ", residual " << out.residual << "\n";
        for (const auto& t : out.terms)
            std::cout << "  " << fmt_term(t, complex) << "\n";
    } else {
        std::cout << "no decomposition found\n";
        std::cerr << rep.diagnostics << "\n";
    }
    if (!a.output.empty()) {
        try {
            write_file(a.output, write_decomposition_file(out));
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }
    return rep.ok ? 0 : 2;
}

int cmd_bounds(const std::string& input, const std::vector<int>& dims,
               const std::vector<int>& degrees, double tol_rank)
{
    try {
        if (!input.empty()) {
            TensorFile tf = load_tensor(input);
            RankBounds b = rank_bounds(tf.tensor, tol_rank);
            std::cout << "tensor " << shape_text(tf.tensor.shape) << "\n";
            std::cout << "lower " << b.lower << "\n";
            std::cout << "upper " << b.upper << (b.upper_atkinson ? " (atkinson)" : " (ambient/2)") << "\n";
            std::cout << "expected " << b.expected << "\n";
            std::cout << "kruskal " << b.kruskal << "\n";
            return 0;
        }
        if (dims.empty())
            throw Error("bounds needs -i or --dims");
        std::vector<int> degs = degrees.empty() ? std::vector<int>(dims.size(), 1) : degrees;
        Shape s(dims, degs);
        std::cout << "shape " << shape_text(s) << "\n";
        if (s.k() == 3 && s.multilinear())
            std::cout << "upper " << rank_upper_bound({dims[0] + 1, dims[1] + 1, dims[2] + 1})
                      << " (atkinson)\n";
        std::cout << "expected " << expected_rank(s) << "\n";
        std::cout << "kruskal " << kruskal_bound(s) << "\n";
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

struct SynthArgs {
    std::vector<int> dims, degrees;
    int rank = 1;
    std::uint64_t seed = 0;
    double noise = 0.0;
    std::string output, truth, field = "real";
};

int cmd_synth(const SynthArgs& a)
{
    try {
        std::vector<int> degs = a.degrees.empty() ? std::vector<int>(a.dims.size(), 1) : a.degrees;
        Shape s(a.dims, degs);
        if (a.rank < 1)
            throw Error("rank must be at least 1");
        bool complex = a.field == "complex";
        std::mt19937_64 rng(a.seed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        auto draw = [&]() { return complex ? cplx(unif(rng), unif(rng)) : cplx(unif(rng), 0.0); };
        std::vector<Term> terms;
        for (int i = 0; i < a.rank; ++i) {
            Term t;
            double mag = 0.5 + 0.5 * (unif(rng) + 1.0);
            t.weight = (unif(rng) < 0 ? -mag : mag);
            if (complex)
                t.weight *= std::polar(1.0, M_PI * unif(rng));
            for (int g = 0; g < s.k(); ++g) {
                std::vector<cplx> z;
                for (int l = 0; l < s.dims[g]; ++l)
                    z.push_back(draw());
                t.point.coords.push_back(std::move(z));
            }
            terms.push_back(std::move(t));
        }
        Polynomial p = expand(s, terms);
        if (a.noise > 0.0) {
            std::normal_distribution<double> gauss(0.0, a.noise);
            Polynomial noisy(s);
            for (const auto& m : enumerate_monomials(s, s.degrees)) {
                cplx e(gauss(rng), complex ? gauss(rng) : 0.0);
                noisy.add(m, p.coef(m) + e);
            }
            p = noisy;
        }
        TensorFile tf{complex ? Field::Complex : Field::Real, p};
        write_file(a.output, write_tensor_file(tf));

        DecompositionFile truth;
        truth.field = tf.field;
        truth.terms = terms;
        Decomposition d{s, terms, 0.0, false, {}};
        truth.residual = verify(p, d);
        truth.meta.seed = a.seed;
        truth.meta.status = "ground-truth";
        std::string tpath = a.truth;
        if (tpath.empty()) {
            tpath = a.output;
            auto dot = tpath.rfind(".json");
            if (dot != std::string::npos && dot + 5 == tpath.size())
                tpath.erase(dot);
            tpath += ".truth.json";
        }
        write_file(tpath, write_decomposition_file(truth));
        std::cout << "wrote " << a.output << " (" << shape_text(s) << ", rank " << a.rank
                  << ") and " << tpath << "\n";
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_verify(const std::string& input, const std::string& decomp, double threshold)
{
    try {
        TensorFile tf = load_tensor(input);
        std::string text = read_file(decomp);
        DecompositionFile df;
        try {
            df = parse_decomposition_file(text);
        } catch (const Error& e) {
            throw Error(decomp + ": " + e.what());
        }
        Decomposition d = to_decomposition(df, tf.tensor.shape);
        double res = verify(tf.tensor, d);
        std::cout << "residual " << format_double(res) << "\n";
        if (res > threshold) {
            std::cout << "above threshold " << threshold << "\n";
            return 3;
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"tdec: rank-1 decompositions of partially symmetric tensors"};
    app.require_subcommand(1);

    DecomposeArgs da;
    auto* dec = app.add_subcommand("decompose", "decompose a tensor file");
    dec->add_option("-i,--input", da.input, "tensor file")->required();
    dec->add_option("-o,--output", da.output, "decomposition file to write");
    dec->add_option("--max-rank", da.max_rank, "largest rank to try (0: automatic)");
    dec->add_option("--tol-rank", da.tol_rank, "relative singular value threshold");
    dec->add_option("--tol-resid", da.tol_resid, "accepted relative residual");
    dec->add_option("--seed", da.seed, "random seed");
    dec->add_flag("--reduce", da.reduce, "compress with a truncated HOSVD first");
    dec->add_option("--field", da.field, "output field")->check(CLI::IsMember({"real", "complex"}));
    dec->add_flag("--verbose", da.verbose, "trace the rank loop on stderr");
    dec->add_flag("--reproducible", da.reproducible, "write elapsed_ms as 0");

    std::string b_input;
    std::vector<int> b_dims, b_degrees;
    double b_tol = 1e-8;
    auto* bnd = app.add_subcommand("bounds", "rank bounds of a tensor file or a shape");
    bnd->add_option("-i,--input", b_input, "tensor file");
    bnd->add_option("--dims", b_dims, "affine dimensions")->delimiter(',');
    bnd->add_option("--degrees", b_degrees, "degrees")->delimiter(',');
    bnd->add_option("--tol-rank", b_tol, "relative singular value threshold");

    SynthArgs sa;
    auto* syn = app.add_subcommand("synth", "generate a random tensor of given rank");
    syn->add_option("--dims", sa.dims, "affine dimensions")->delimiter(',')->required();
    syn->add_option("--degrees", sa.degrees, "degrees (default all 1)")->delimiter(',');
    syn->add_option("--rank", sa.rank, "number of rank-1 terms")->required();
    syn->add_option("--seed", sa.seed, "random seed");
    syn->add_option("--noise", sa.noise, "standard deviation of coefficient noise");
    syn->add_option("--field", sa.field, "real or complex")->check(CLI::IsMember({"real", "complex"}));
    syn->add_option("-o,--output", sa.output, "tensor file to write")->required();
    syn->add_option("--truth", sa.truth, "ground-truth decomposition file");

    std::string v_input, v_dec;
    double v_threshold = 1e-6;
    auto* ver = app.add_subcommand("verify", "residual of a decomposition against a tensor");
    ver->add_option("-i,--input", v_input, "tensor file")->required();
    ver->add_option("-d,--decomposition", v_dec, "decomposition file")->required();
    ver->add_option("--threshold,--tol-resid", v_threshold, "largest accepted residual");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (*dec)
        return cmd_decompose(da);
    if (*bnd)
        return cmd_bounds(b_input, b_dims, b_degrees, b_tol);
    if (*syn)
        return cmd_synth(sa);
    return cmd_verify(v_input, v_dec, v_threshold);
}
