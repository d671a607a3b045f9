// Command-line front end: formal series solutions of nonlinear ODEs,
// ODE systems and 1+1-dimensional PDEs by proper operator exponentials,
// series resummation through invertible time substitutions, Fourier-form
// output, chronological-exponent identity checks, and numeric comparison
// against a Runge-Kutta reference.
//
// Exit codes: 0 success, 2 parse/validation error, 3 resummation
// consistency failure, 4 identity check failure, 5 comparison tolerance
// failure, 1 unexpected error.

#include "opexp/opexp.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

namespace {

using namespace opexp;

struct CliError {
    int code;
    std::string message;
};

Substitution make_substitution(const std::string& name, const std::string& tvar,
                               const std::string& p_value) {
    Substitution sub;
    if (name == "identity") {
        sub = identity_sub(tvar);
    } else if (name == "exp") {
        sub = exp_sub(tvar);
    } else if (name == "mobius") {
        sub = mobius_sub(tvar);
    } else if (name.rfind("file:", 0) == 0) {
        sub = load_substitution(name.substr(5));
    } else {
        throw CliError{2, "unknown substitution '" + name +
                              "' (identity, exp, mobius, file:<path>)"};
    }
    if (p_value != "symbolic" && !sub.param.empty()) {
        Rational v;
        try {
            v = Rational::parse(p_value);
        } catch (const std::exception&) {
            throw CliError{2, "--p expects a rational or 'symbolic', got '" + p_value + "'"};
        }
        sub = bind_param(sub, v);
    }
    return sub;
}

std::vector<SeriesSolution> solve_problem(const Problem& p, int order) {
    Problem sys = reduce_to_first_order(p);
    std::vector<SeriesSolution> all = taylor_coefficients(sys, order);
    std::vector<SeriesSolution> out;
    for (const auto& u : p.unknowns) out.push_back(component(all, u));
    return out;
}

int cmd_solve(const std::string& path, int order, const std::string& format) {
    Problem p = load_problem(path);
    std::vector<SeriesSolution> series = solve_problem(p, order);
    if (format == "text") {
        for (const auto& s : series) std::cout << to_text(s) << "\n";
    } else if (format == "latex") {
        for (const auto& s : series) std::cout << to_latex(s) << "\n";
    } else if (format == "csv") {
        std::cout << "unknown,n,coefficient\n";
        for (const auto& s : series)
            for (int n = 0; n <= s.order; ++n)
                std::cout << s.unknown << "," << n << ","
                          << "\"" << s.k[static_cast<size_t>(n)].str() << "\"\n";
    } else {
        std::cout << to_dump(series).print();
    }
    return 0;
}

int cmd_resum(const std::string& path, int order, const std::string& sub_name,
              const std::string& p_value, bool check, const std::string& format) {
    Problem p = load_problem(path);
    Substitution sub = make_substitution(sub_name, p.tvar, p_value);
    std::vector<GeneralizedSeries> gen = resummed_series(p, sub, order);

    if (format == "text") {
        for (const auto& g : gen) std::cout << to_text(g) << "\n";
    } else if (format == "latex") {
        for (const auto& g : gen) std::cout << to_latex(g) << "\n";
    } else if (format == "csv") {
        std::cout << "unknown,n,coefficient\n";
        for (const auto& g : gen)
            for (int n = 0; n <= g.order; ++n)
                std::cout << g.unknown << "," << n << ","
                          << "\"" << g.b[static_cast<size_t>(n)].str() << "\"\n";
    } else {
        for (const auto& g : gen) std::cout << to_dump(g).print();
    }

    if (check) {
        std::vector<SeriesSolution> plain = solve_problem(p, order);
        bool ok = true;
        for (size_t i = 0; i < gen.size(); ++i) {
            SeriesSolution expanded = expand_generalized(gen[i], order);
            for (int n = 0; n <= order; ++n)
                ok = ok && expanded.k[static_cast<size_t>(n)] == plain[i].k[static_cast<size_t>(n)];
        }
        std::cout << (ok ? "CONSISTENT" : "INCONSISTENT") << "\n";
        if (!ok) return 3;
    }
    return 0;
}

int cmd_fourier(const std::string& path, int order, const std::string& sub_name,
                const std::string& p_value, const std::string& omega_value,
                const std::string& format) {
    Problem p = load_problem(path);
    if (sub_name != "exp")
        throw CliError{2, "fourier requires the exponential substitution"};
    if (p_value != "symbolic")
        throw CliError{2, "fourier substitutes p = i*omega; keep --p symbolic"};
    Substitution sub = make_substitution(sub_name, p.tvar, p_value);
    Expr omega = omega_value == "symbolic" ? sym("omega") : num(Rational::parse(omega_value));
    std::vector<GeneralizedSeries> gen = resummed_series(p, sub, order);
    for (const auto& g : gen) {
        FourierSeries f = fourier_form(g, omega);
        if (format == "structured")
            std::cout << to_dump(f).print();
        else
            std::cout << to_text(f, p.tvar);
    }
    return 0;
}

int cmd_verify(int dim, int degree, int depth, unsigned long seed, int pairs,
               const std::string& identity_filter, const std::string& matrix_file,
               const std::string& matrix_file2, const std::string& a_text,
               const std::string& format) {
    Rational a = Rational::parse(a_text);
    std::vector<ChronoIdentity> ids;
    if (identity_filter == "all") {
        ids = {ChronoIdentity::inverse, ChronoIdentity::bch_product,
               ChronoIdentity::zassenhaus_split, ChronoIdentity::anti_split};
    } else {
        ids = {chrono_identity_from(identity_filter)};
    }

    std::vector<std::pair<MatrixPoly, MatrixPoly>> instances;
    if (!matrix_file.empty()) {
        MatrixPoly B = load_matrix(matrix_file);
        MatrixPoly A = matrix_file2.empty() ? MatrixPoly(B.d) : load_matrix(matrix_file2);
        if (A.d != B.d) throw CliError{2, "matrix files have different dimensions"};
        instances.push_back({B, A});
    } else {
        std::mt19937_64 rng(seed);
        for (int k = 0; k < pairs; ++k)
            instances.push_back({random_matrix(rng, dim, degree), random_matrix(rng, dim, degree)});
    }

    std::vector<IdentityReport> reports;
    bool all_pass = true;
    for (ChronoIdentity id : ids) {
        int passed = 0;
        for (size_t k = 0; k < instances.size(); ++k) {
            IdentityReport rep = check_identity(id, instances[k].first, instances[k].second, a,
                                                depth);
            reports.push_back(rep);
            if (rep.pass) {
                ++passed;
            } else {
                all_pass = false;
                std::cerr << "FAIL " << to_string(id) << " on instance " << k
                          << ": first differing order " << rep.first_nonzero_order
                          << " (depth " << depth << ")\n";
                std::cerr << "B =\n" << instances[k].first.str();
                std::cerr << "A =\n" << instances[k].second.str();
            }
        }
        if (format != "structured")
            std::cout << to_string(id) << ": " << passed << "/" << instances.size()
                      << " PASS (dim " << instances[0].first.d << ", degree <= " << degree
                      << ", depth " << depth << ")\n";
    }
    if (format == "structured") std::cout << to_dump(reports).print();
    return all_pass ? 0 : 4;
}

int cmd_compare(const std::string& path, int order, const std::string& sub_name,
                const std::string& p_value, double tol, int steps, double t_end, int samples,
                const std::string& format) {
    Problem p = load_problem(path);
    if (p.is_pde()) throw CliError{2, "compare covers ODE problems only"};
    if (samples < 2) throw CliError{2, "--samples must be at least 2"};

    std::vector<double> ts;
    double t0 = p.a.to_double();
    for (int k = 0; k < samples; ++k) ts.push_back(t0 + (t_end - t0) * k / (samples - 1));

    ComparisonReport rep;
    if (sub_name.empty()) {
        Problem sys = reduce_to_first_order(p);
        std::vector<SeriesSolution> all = taylor_coefficients(sys, order);
        rep = compare_series_numeric(component(all, p.unknowns[0]), p, {}, ts, tol, steps);
    } else {
        Substitution sub = make_substitution(sub_name, p.tvar, p_value);
        std::vector<GeneralizedSeries> gen = resummed_series(p, sub, order);
        if (!gen[0].sub.param.empty())
            throw CliError{2, "compare needs a numeric --p for the substitution"};
        rep = compare_series_numeric(gen[0], p, {}, ts, tol, steps);
    }

    if (format == "text") {
        for (const auto& r : rep.rows)
            std::printf("t=%- 12g series=%- 18.12g reference=%- 18.12g rel_err=%g\n", r.t,
                        r.series, r.reference, r.rel_err);
    } else if (format == "structured") {
        std::cout << to_dump(rep).print();
    } else {
        std::cout << to_csv(rep);
    }
    std::cerr << (rep.pass ? "PASS" : "FAIL") << " max_rel_err=" << rep.max_rel
              << " tol=" << rep.tol << "\n";
    return rep.pass ? 0 : 5;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Formal series solutions of Cauchy problems via proper operator exponents"};
    app.require_subcommand(1);

    std::string problem_path, format = "text", sub_name = "exp", compare_sub,
                p_value = "symbolic", omega_value = "symbolic";
    int order = 8;
    bool check = false;

    auto add_common = [&](CLI::App* c, bool with_problem = true) {
        if (with_problem) c->add_option("problem", problem_path, "problem file")->required();
        c->add_option("--order", order, "truncation order N")->check(CLI::NonNegativeNumber);
        c->add_option("--format", format, "output format")
            ->check(CLI::IsMember({"text", "latex", "csv", "structured"}));
    };

    CLI::App* solve = app.add_subcommand("solve", "Taylor-series solution");
    add_common(solve);

    CLI::App* resum = app.add_subcommand("resum", "resummed (generalized) series");
    add_common(resum);
    resum->add_option("--sub", sub_name,
                      "substitution: identity|exp|mobius|file:<path> (default exp)");
    resum->add_option("--p", p_value, "substitution parameter: rational or 'symbolic'");
    resum->add_flag("--check", check, "verify expansion matches the plain Taylor series");

    CLI::App* fourier = app.add_subcommand("fourier", "Fourier-series form (p = i*omega)");
    add_common(fourier);
    fourier->add_option("--sub", sub_name, "substitution (must be exp)");
    fourier->add_option("--p", p_value, "must stay 'symbolic'");
    fourier->add_option("--omega", omega_value, "frequency: rational or 'symbolic'");

    int dim = 2, degree = 2, depth = 4, pairs = 20, steps = 1000, samples = 11;
    unsigned long seed = 1;
    double tol = 1e-8, t_end = 0.5;
    std::string identity_filter = "all", matrix_file, matrix_file2, a_text = "0";

    CLI::App* verify = app.add_subcommand("verify", "chronological-exponent identity checks");
    verify->add_option("--dim", dim, "matrix dimension")->check(CLI::PositiveNumber);
    verify->add_option("--degree", degree, "max entry degree")->check(CLI::NonNegativeNumber);
    verify->add_option("--depth", depth, "truncation depth K")->check(CLI::NonNegativeNumber);
    verify->add_option("--seed", seed, "random seed");
    verify->add_option("--pairs", pairs, "number of random matrix pairs")
        ->check(CLI::PositiveNumber);
    verify->add_option("--identity", identity_filter,
                       "inverse|bch-product|zassenhaus-split|anti-split|all");
    verify->add_option("--matrix-file", matrix_file, "matrix input file for B");
    verify->add_option("--matrix-file2", matrix_file2, "matrix input file for A (or C)");
    verify->add_option("--a", a_text, "base point a (rational)");
    verify->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"text", "structured"}));

    CLI::App* compare = app.add_subcommand("compare", "series vs RK4 reference");
    add_common(compare);
    compare->add_option("--sub", compare_sub, "compare a resummed series instead of Taylor");
    compare->add_option("--p", p_value, "substitution parameter (numeric)");
    compare->add_option("--tol", tol, "max relative error")->check(CLI::PositiveNumber);
    compare->add_option("--steps", steps, "RK4 step count")->check(CLI::PositiveNumber);
    compare->add_option("--t-end", t_end, "end of the sample interval");
    compare->add_option("--samples", samples, "number of sample points");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(problem_path, order, format);
        if (resum->parsed())
            return cmd_resum(problem_path, order, sub_name, p_value, check, format);
        if (fourier->parsed())
            return cmd_fourier(problem_path, order, sub_name, p_value, omega_value, format);
        if (verify->parsed())
            return cmd_verify(dim, degree, depth, seed, pairs, identity_filter, matrix_file,
                              matrix_file2, a_text, format);
        if (compare->parsed())
            return cmd_compare(problem_path, order, compare_sub, p_value, tol, steps, t_end,
                               samples, format);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ProblemError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SubstitutionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DumpError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
