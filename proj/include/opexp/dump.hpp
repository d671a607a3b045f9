#pragma once

// Structured output: a self-describing ordered key-value text document with
// the version marker "opexp-dump-1" on the first line. Coefficients are
// serialized in the expression grammar, so a dump re-reads into the same
// object and re-prints byte-identically.

#include "opexp/chrono_exp.hpp"
#include "opexp/printer.hpp"
#include "opexp/validate.hpp"

#include <sstream>
#include <string>
#include <vector>

namespace opexp {

struct DumpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Dump {
    std::vector<std::pair<std::string, std::string>> kv;

    void add(const std::string& key, const std::string& value) { kv.push_back({key, value}); }

    const std::string* find(const std::string& key) const {
        for (const auto& [k, v] : kv)
            if (k == key) return &v;
        return nullptr;
    }
    std::string need(const std::string& key) const {
        const std::string* v = find(key);
        if (!v) throw DumpError("dump: missing key '" + key + "'");
        return *v;
    }

    std::string print() const {
        std::string out = "opexp-dump-1\n";
        for (const auto& [k, v] : kv) out += k + ": " + v + "\n";
        return out;
    }

    static Dump read(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        if (!std::getline(in, line) || line != "opexp-dump-1")
            throw DumpError("dump: missing 'opexp-dump-1' header");
        Dump d;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto colon = line.find(": ");
            if (colon == std::string::npos) throw DumpError("dump: bad line '" + line + "'");
            d.add(line.substr(0, colon), line.substr(colon + 2));
        }
        return d;
    }
};

namespace detail {

inline std::string names_line(const std::vector<Expr>& exprs) {
    std::set<std::string> fn;
    for (const auto& e : exprs)
        for (const auto& a : atoms(e))
            if (a.kind == AtomKind::func) fn.insert(a.name);
    std::string out;
    for (const auto& n : fn) out += (out.empty() ? "" : " ") + n;
    return out;
}

inline ParseContext ctx_from_dump(const Dump& d) {
    ParseContext ctx;
    if (const std::string* fns = d.find("functions")) {
        std::istringstream in(*fns);
        std::string n;
        while (in >> n) ctx.functions.insert(n);
    }
    return ctx;
}

} // namespace detail

inline Dump to_dump(const SeriesSolution& s) {
    Dump d;
    d.add("object", "series");
    d.add("unknown", s.unknown);
    d.add("tvar", s.tvar);
    d.add("a", s.a.str());
    d.add("order", std::to_string(s.order));
    d.add("basis", "(t-a)^n/n!");
    d.add("functions", detail::names_line(s.k));
    for (int n = 0; n <= s.order; ++n)
        d.add("coeff[" + std::to_string(n) + "]", s.k[static_cast<size_t>(n)].str());
    return d;
}

inline SeriesSolution series_from_dump(const Dump& d) {
    if (d.need("object") != "series") throw DumpError("dump: not a series object");
    SeriesSolution s;
    s.unknown = d.need("unknown");
    s.tvar = d.need("tvar");
    s.a = Rational::parse(d.need("a"));
    s.order = std::stoi(d.need("order"));
    ParseContext ctx = detail::ctx_from_dump(d);
    for (int n = 0; n <= s.order; ++n)
        s.k.push_back(parse(d.need("coeff[" + std::to_string(n) + "]"), ctx));
    return s;
}

inline Dump to_dump(const std::vector<SeriesSolution>& all) {
    if (all.size() == 1) return to_dump(all[0]);
    Dump d;
    d.add("object", "series-system");
    std::string names;
    for (const auto& s : all) names += (names.empty() ? "" : " ") + s.unknown;
    d.add("unknowns", names);
    d.add("tvar", all.at(0).tvar);
    d.add("a", all.at(0).a.str());
    d.add("order", std::to_string(all.at(0).order));
    d.add("basis", "(t-a)^n/n!");
    std::vector<Expr> every;
    for (const auto& s : all) every.insert(every.end(), s.k.begin(), s.k.end());
    d.add("functions", detail::names_line(every));
    for (const auto& s : all)
        for (int n = 0; n <= s.order; ++n)
            d.add("coeff[" + s.unknown + "][" + std::to_string(n) + "]",
                  s.k[static_cast<size_t>(n)].str());
    return d;
}

inline std::vector<SeriesSolution> series_system_from_dump(const Dump& d) {
    if (d.need("object") == "series") return {series_from_dump(d)};
    if (d.need("object") != "series-system") throw DumpError("dump: not a series object");
    ParseContext ctx = detail::ctx_from_dump(d);
    std::vector<SeriesSolution> out;
    std::istringstream names(d.need("unknowns"));
    std::string name;
    while (names >> name) {
        SeriesSolution s;
        s.unknown = name;
        s.tvar = d.need("tvar");
        s.a = Rational::parse(d.need("a"));
        s.order = std::stoi(d.need("order"));
        for (int n = 0; n <= s.order; ++n)
            s.k.push_back(parse(d.need("coeff[" + name + "][" + std::to_string(n) + "]"), ctx));
        out.push_back(std::move(s));
    }
    return out;
}

inline Dump to_dump(const GeneralizedSeries& g) {
    Dump d;
    d.add("object", "generalized-series");
    d.add("unknown", g.unknown);
    d.add("tvar", g.tvar);
    d.add("a", g.a.str());
    d.add("order", std::to_string(g.order));
    d.add("sub", g.sub.name);
    d.add("sub-param", g.sub.param);
    d.add("sub-tnew", g.sub.tnew);
    d.add("sub-forward", g.sub.forward.str());
    d.add("sub-inverse", g.sub.inverse.str());
    d.add("tau0", g.tau0.str());
    d.add("basis", "(forward(t)-tau0)^n");
    d.add("functions", detail::names_line(g.b));
    for (int n = 0; n <= g.order; ++n)
        d.add("coeff[" + std::to_string(n) + "]", g.b[static_cast<size_t>(n)].str());
    return d;
}

inline GeneralizedSeries generalized_from_dump(const Dump& d) {
    if (d.need("object") != "generalized-series")
        throw DumpError("dump: not a generalized-series object");
    GeneralizedSeries g;
    g.unknown = d.need("unknown");
    g.tvar = d.need("tvar");
    g.a = Rational::parse(d.need("a"));
    g.order = std::stoi(d.need("order"));
    g.sub.name = d.need("sub");
    g.sub.param = d.need("sub-param");
    g.sub.told = g.tvar;
    g.sub.tnew = d.need("sub-tnew");
    g.sub.forward = parse(d.need("sub-forward"));
    g.sub.inverse = parse(d.need("sub-inverse"));
    g.tau0 = Rational::parse(d.need("tau0"));
    ParseContext ctx = detail::ctx_from_dump(d);
    for (int n = 0; n <= g.order; ++n)
        g.b.push_back(parse(d.need("coeff[" + std::to_string(n) + "]"), ctx));
    return g;
}

inline Dump to_dump(const FourierSeries& f) {
    Dump d;
    d.add("object", "fourier-series");
    d.add("unknown", f.unknown);
    d.add("omega", f.omega.str());
    d.add("order", std::to_string(f.order));
    d.add("functions", detail::names_line(f.harmonics));
    for (int k = 0; k <= f.order; ++k)
        d.add("harmonic[" + std::to_string(k) + "]", f.harmonics[static_cast<size_t>(k)].str());
    return d;
}

inline FourierSeries fourier_from_dump(const Dump& d) {
    if (d.need("object") != "fourier-series") throw DumpError("dump: not a fourier object");
    FourierSeries f;
    f.unknown = d.need("unknown");
    f.omega = parse(d.need("omega"));
    f.order = std::stoi(d.need("order"));
    ParseContext ctx = detail::ctx_from_dump(d);
    for (int k = 0; k <= f.order; ++k)
        f.harmonics.push_back(parse(d.need("harmonic[" + std::to_string(k) + "]"), ctx));
    return f;
}

inline Dump to_dump(const ComparisonReport& rep) {
    Dump d;
    d.add("object", "comparison");
    d.add("tol", std::to_string(rep.tol));
    d.add("steps", std::to_string(rep.steps));
    d.add("max-abs-err", std::to_string(rep.max_abs));
    d.add("max-rel-err", std::to_string(rep.max_rel));
    d.add("pass", rep.pass ? "true" : "false");
    std::ostringstream os;
    os.precision(15);
    for (size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        os.str("");
        os << r.t << " " << r.series << " " << r.reference << " " << r.abs_err << " "
           << r.rel_err;
        d.add("row[" + std::to_string(i) + "]", os.str());
    }
    return d;
}

inline Dump to_dump(const std::vector<IdentityReport>& reps) {
    Dump d;
    d.add("object", "identity-suite");
    d.add("count", std::to_string(reps.size()));
    for (size_t i = 0; i < reps.size(); ++i) {
        const auto& r = reps[i];
        std::string v = std::string(to_string(r.id)) + " dim=" + std::to_string(r.dim) +
                        " depth=" + std::to_string(r.depth) +
                        " first_nonzero_order=" + std::to_string(r.first_nonzero_order) +
                        (r.pass ? " PASS" : " FAIL");
        d.add("check[" + std::to_string(i) + "]", v);
    }
    return d;
}

} // namespace opexp
