#include "tdec/io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace tdec {

using json = nlohmann::json;

std::string format_double(double x)
{
    if (x == 0.0)
        return "0";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

struct Locator {
    const std::string& text;

    int line_at(std::size_t byte) const
    {
        int line = 1;
        for (std::size_t i = 0; i < byte && i < text.size(); ++i)
            if (text[i] == '\n')
                ++line;
        return line;
    }
    // line of the n-th occurrence of a quoted key, 0-based
    int line_of(const std::string& key, int n) const
    {
        std::string pat = "\"" + key + "\"";
        std::size_t pos = 0;
        for (int i = 0; i <= n; ++i) {
            pos = text.find(pat, i == 0 ? 0 : pos + 1);
            if (pos == std::string::npos)
                return 0;
        }
        return line_at(pos);
    }
    [[noreturn]] void fail(int line, const std::string& msg) const
    {
        if (line > 0)
            throw Error("line " + std::to_string(line) + ": " + msg);
        throw Error(msg);
    }
};

json parse_json(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        Locator loc{text};
        std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
        int line = loc.line_at(byte);
        std::size_t start = text.rfind('\n', byte == 0 ? 0 : byte - 1);
        std::size_t col = start == std::string::npos ? byte + 1 : byte - start;
        throw Error("line " + std::to_string(line) + ", column " + std::to_string(col) +
                    ": malformed JSON");
    }
}

cplx read_number(const json& j, const Locator& loc, int line, const char* what)
{
    if (j.is_number())
        return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    loc.fail(line, std::string(what) + " must be a number or an [re, im] pair");
}

std::vector<int> read_ints(const json& j, const Locator& loc, int line, const char* what)
{
    if (!j.is_array())
        loc.fail(line, std::string(what) + " must be a list of integers");
    std::vector<int> out;
    for (const auto& x : j) {
        if (!x.is_number_integer())
            loc.fail(line, std::string(what) + " must be a list of integers");
        out.push_back(x.get<int>());
    }
    return out;
}

Field read_field(const json& doc, const Locator& loc)
{
    if (!doc.contains("field"))
        return Field::Real;
    const auto& f = doc["field"];
    if (f == "real")
        return Field::Real;
    if (f == "complex")
        return Field::Complex;
    loc.fail(loc.line_of("field", 0), "field must be \"real\" or \"complex\"");
}

std::string number_text(cplx c, Field f)
{
    if (f == Field::Real)
        return format_double(c.real());
    return "[" + format_double(c.real()) + ", " + format_double(c.imag()) + "]";
}

std::string ints_text(const std::vector<int>& v)
{
    std::string out = "[";
    for (size_t i = 0; i < v.size(); ++i)
        out += (i ? ", " : "") + std::to_string(v[i]);
    return out + "]";
}

std::string escape(const std::string& s) { return json(s).dump(); }

}  // namespace

TensorFile parse_tensor_file(const std::string& text)
{
    Locator loc{text};
    json doc = parse_json(text);
    if (!doc.is_object())
        loc.fail(1, "tensor file must be a JSON object");
    for (const char* key : {"dims", "degrees", "terms"})
        if (!doc.contains(key))
            loc.fail(0, std::string("missing key \"") + key + "\"");
    TensorFile f;
    f.field = read_field(doc, loc);
    auto dims = read_ints(doc["dims"], loc, loc.line_of("dims", 0), "dims");
    auto degs = read_ints(doc["degrees"], loc, loc.line_of("degrees", 0), "degrees");
    Shape s;
    try {
        s = Shape(dims, degs);
    } catch (const Error& e) {
        loc.fail(loc.line_of("dims", 0), e.what());
    }
    f.tensor = Polynomial(s);
    if (!doc["terms"].is_array())
        loc.fail(loc.line_of("terms", 0), "terms must be a list");
    std::set<Monomial> seen;
    int idx = 0;
    for (const auto& t : doc["terms"]) {
        int line = loc.line_of("exp", idx);
        if (!t.is_object() || !t.contains("exp") || !t.contains("coef"))
            loc.fail(line, "term " + std::to_string(idx) + " needs \"exp\" and \"coef\"");
        const auto& e = t["exp"];
        if (!e.is_array() || static_cast<int>(e.size()) != s.k())
            loc.fail(line, "term " + std::to_string(idx) + ": expected " + std::to_string(s.k()) +
                               " exponent lists");
        std::vector<std::vector<int>> groups;
        for (int g = 0; g < s.k(); ++g) {
            auto v = read_ints(e[g], loc, line, "exponent list");
            if (static_cast<int>(v.size()) != s.dims[g])
                loc.fail(line, "term " + std::to_string(idx) + ": exponent list " +
                                   std::to_string(g) + " has length " + std::to_string(v.size()) +
                                   ", expected " + std::to_string(s.dims[g]));
            groups.push_back(std::move(v));
        }
        Monomial m;
        try {
            m = from_groups(s, groups);
        } catch (const Error& err) {
            loc.fail(line, "term " + std::to_string(idx) + ": " + err.what());
        }
        if (!within(s, m))
            loc.fail(line, "term " + std::to_string(idx) + ": degree exceeds the group degrees");
        if (!seen.insert(m).second)
            loc.fail(line, "term " + std::to_string(idx) + ": duplicate exponent");
        cplx c = read_number(t["coef"], loc, line, "coef");
        if (f.field == Field::Real && c.imag() != 0.0)
            loc.fail(line, "term " + std::to_string(idx) + ": complex coefficient in a real file");
        f.tensor.add(m, c);
        ++idx;
    }
    return f;
}

std::string write_tensor_file(const TensorFile& f)
{
    const Shape& s = f.tensor.shape;
    std::ostringstream os;
    os << "{\n";
    os << "  \"dims\": " << ints_text(s.dims) << ",\n";
    os << "  \"degrees\": " << ints_text(s.degrees) << ",\n";
    os << "  \"field\": \"" << (f.field == Field::Real ? "real" : "complex") << "\",\n";
    os << "  \"terms\": [";
    bool first = true;
    for (const auto& [m, c] : f.tensor.terms) {
        os << (first ? "\n" : ",\n");
        first = false;
        os << "    {\"exp\": [";
        auto groups = to_groups(s, m);
        for (size_t g = 0; g < groups.size(); ++g)
            os << (g ? ", " : "") << ints_text(groups[g]);
        os << "], \"coef\": " << number_text(c, f.field) << "}";
    }
    os << (first ? "]\n" : "\n  ]\n");
    os << "}\n";
    return os.str();
}

static bool same_bounds(const RankBounds& a, const RankBounds& b)
{
    return a.lower == b.lower && a.upper == b.upper && a.upper_atkinson == b.upper_atkinson &&
           a.expected == b.expected && a.kruskal == b.kruskal;
}

bool DecompositionMeta::operator==(const DecompositionMeta& o) const
{
    return seed == o.seed && tol_rank == o.tol_rank && tol_resid == o.tol_resid &&
           same_bounds(bounds, o.bounds) && coordinate_change_applied == o.coordinate_change_applied &&
           elapsed_ms == o.elapsed_ms && reduced == o.reduced && reduced_dims == o.reduced_dims &&
           status == o.status && diagnostics == o.diagnostics;
}

bool DecompositionFile::operator==(const DecompositionFile& o) const
{
    if (field != o.field || residual != o.residual || !(meta == o.meta) ||
        terms.size() != o.terms.size())
        return false;
    for (size_t i = 0; i < terms.size(); ++i)
        if (terms[i].weight != o.terms[i].weight || terms[i].point.coords != o.terms[i].point.coords)
            return false;
    return true;
}

DecompositionFile parse_decomposition_file(const std::string& text)
{
    Locator loc{text};
    json doc = parse_json(text);
    if (!doc.is_object())
        loc.fail(1, "decomposition file must be a JSON object");
    for (const char* key : {"rank", "terms", "residual"})
        if (!doc.contains(key))
            loc.fail(0, std::string("missing key \"") + key + "\"");
    DecompositionFile f;
    f.field = read_field(doc, loc);
    if (!doc["terms"].is_array())
        loc.fail(loc.line_of("terms", 0), "terms must be a list");
    int idx = 0;
    for (const auto& t : doc["terms"]) {
        int line = loc.line_of("weight", idx);
        if (!t.is_object() || !t.contains("weight") || !t.contains("points"))
            loc.fail(line, "term " + std::to_string(idx) + " needs \"weight\" and \"points\"");
        Term term;
        term.weight = read_number(t["weight"], loc, line, "weight");
        if (!t["points"].is_array())
            loc.fail(line, "points must be a list of coordinate lists");
        for (const auto& g : t["points"]) {
            if (!g.is_array())
                loc.fail(line, "points must be a list of coordinate lists");
            std::vector<cplx> coords;
            for (const auto& x : g)
                coords.push_back(read_number(x, loc, line, "coordinate"));
            term.point.coords.push_back(std::move(coords));
        }
        f.terms.push_back(std::move(term));
        ++idx;
    }
    if (!doc["rank"].is_number_integer() || doc["rank"].get<int>() != f.rank())
        loc.fail(loc.line_of("rank", 0), "rank does not match the number of terms");
    if (!doc["residual"].is_number() || doc["residual"].get<double>() < 0.0)
        loc.fail(loc.line_of("residual", 0), "residual must be a non-negative number");
    f.residual = doc["residual"].get<double>();
    if (doc.contains("meta")) {
        const auto& m = doc["meta"];
        DecompositionMeta& meta = f.meta;
        meta.seed = m.value("seed", std::uint64_t{0});
        if (m.contains("tolerances")) {
            meta.tol_rank = m["tolerances"].value("rank", 1e-8);
            meta.tol_resid = m["tolerances"].value("resid", 1e-6);
        }
        if (m.contains("bounds")) {
            const auto& b = m["bounds"];
            meta.bounds.lower = b.value("lower", 0);
            meta.bounds.upper = b.value("upper", 0);
            meta.bounds.upper_atkinson = b.value("upper_atkinson", false);
            meta.bounds.expected = b.value("expected", 0);
            meta.bounds.kruskal = b.value("kruskal", 0);
        }
        meta.coordinate_change_applied = m.value("coordinate_change_applied", false);
        meta.elapsed_ms = m.value("elapsed_ms", 0.0);
        meta.reduced = m.value("reduced", false);
        if (m.contains("reduced_dims"))
            meta.reduced_dims = m["reduced_dims"].get<std::vector<int>>();
        meta.status = m.value("status", std::string("ok"));
        meta.diagnostics = m.value("diagnostics", std::string());
    }
    return f;
}

std::string write_decomposition_file(const DecompositionFile& f)
{
    const DecompositionMeta& m = f.meta;
    std::ostringstream os;
    os << "{\n";
    os << "  \"rank\": " << f.rank() << ",\n";
    os << "  \"field\": \"" << (f.field == Field::Real ? "real" : "complex") << "\",\n";
    os << "  \"terms\": [";
    for (size_t i = 0; i < f.terms.size(); ++i) {
        const Term& t = f.terms[i];
        os << (i ? ",\n" : "\n") << "    {\"weight\": " << number_text(t.weight, f.field)
           << ", \"points\": [";
        for (size_t g = 0; g < t.point.coords.size(); ++g) {
            os << (g ? ", " : "") << "[";
            for (size_t l = 0; l < t.point.coords[g].size(); ++l)
                os << (l ? ", " : "") << number_text(t.point.coords[g][l], f.field);
            os << "]";
        }
        os << "]}";
    }
    os << (f.terms.empty() ? "],\n" : "\n  ],\n");
    os << "  \"residual\": " << format_double(f.residual) << ",\n";
    os << "  \"meta\": {\n";
    os << "    \"seed\": " << m.seed << ",\n";
    os << "    \"tolerances\": {\"rank\": " << format_double(m.tol_rank)
       << ", \"resid\": " << format_double(m.tol_resid) << "},\n";
    os << "    \"bounds\": {\"lower\": " << m.bounds.lower << ", \"upper\": " << m.bounds.upper
       << ", \"upper_atkinson\": " << (m.bounds.upper_atkinson ? "true" : "false")
       << ", \"expected\": " << m.bounds.expected << ", \"kruskal\": " << m.bounds.kruskal << "},\n";
    os << "    \"coordinate_change_applied\": " << (m.coordinate_change_applied ? "true" : "false")
       << ",\n";
    os << "    \"reduced\": " << (m.reduced ? "true" : "false") << ",\n";
    os << "    \"reduced_dims\": " << ints_text(m.reduced_dims) << ",\n";
    os << "    \"status\": " << escape(m.status) << ",\n";
    os << "    \"diagnostics\": " << escape(m.diagnostics) << ",\n";
    os << "    \"elapsed_ms\": " << format_double(m.elapsed_ms) << "\n";
    os << "  }\n";
    os << "}\n";
    return os.str();
}

Decomposition to_decomposition(const DecompositionFile& f, const Shape& s)
{
    Decomposition d;
    d.shape = s;
    for (const auto& t : f.terms) {
        if (static_cast<int>(t.point.coords.size()) != s.k())
            throw Error("decomposition has " + std::to_string(t.point.coords.size()) +
                        " coordinate groups, tensor has " + std::to_string(s.k()));
        for (int g = 0; g < s.k(); ++g)
            if (static_cast<int>(t.point.coords[g].size()) != s.dims[g])
                throw Error("decomposition point size does not match the tensor dimensions");
        d.terms.push_back(t);
    }
    d.residual = f.residual;
    return d;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path);
    out << text;
    if (!out)
        throw Error("write failed for " + path);
}

}  // namespace tdec
