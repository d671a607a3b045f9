#pragma once

// Independent checks for the series engine.
//
// oracle_coefficients computes Cauchy coefficients the pedestrian way:
// differentiate the equations n times in t, reduce higher derivatives
// through the equations, then bind t = a and the initial data. It shares
// only the expression kernel with the generator route.
//
// rk4_solve is a fixed-step classical Runge-Kutta reference integrator for
// numeric spot checks, and compare_series_numeric scores a truncated series
// against it.

#include "opexp/series_engine.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace opexp {

inline std::vector<SeriesSolution> oracle_coefficients(const Problem& p, int order) {
    if (order < 0) throw std::invalid_argument("oracle_coefficients: negative order");

    // cache of (d/dx)^k F_i
    std::vector<std::vector<Expr>> dxf(p.dim());
    for (size_t i = 0; i < p.dim(); ++i) dxf[i].push_back(p.rhs[i]);
    auto rhs_dx = [&](size_t i, int k) {
        auto& col = dxf[i];
        while (static_cast<int>(col.size()) <= k)
            col.push_back(total_diff_x(col.back(), p.xvar, ""));
        return col[static_cast<size_t>(k)];
    };

    // total time derivative along solutions
    auto ddt = [&](const Expr& e) {
        return derive(e, [&](const Atom& at) -> Expr {
            if (at.kind == AtomKind::symbol)
                return at.name == p.tvar ? num(1) : Expr();
            if (at.kind != AtomKind::unknown) return Expr();
            size_t i = static_cast<size_t>(p.unknown_index(at.name));
            if (at.tord + 1 < p.torder[i]) {
                Atom up = at;
                up.tord += 1;
                return make_atom(up);
            }
            return rhs_dx(i, at.xord);
        });
    };

    auto bind = [&](Expr e) {
        e = substitute(e, sym_atom(p.tvar), num(p.a));
        for (const auto& at : atoms(e)) {
            if (at.kind != AtomKind::unknown) continue;
            size_t i = static_cast<size_t>(p.unknown_index(at.name));
            Expr v = p.inits[i][static_cast<size_t>(at.tord)];
            for (int k = 0; k < at.xord; ++k) v = total_diff_x(v, p.xvar, p.tvar);
            e = substitute(e, at, v);
        }
        return e;
    };

    std::vector<SeriesSolution> out(p.dim());
    for (size_t i = 0; i < p.dim(); ++i) {
        out[i].unknown = p.unknowns[i];
        out[i].tvar = p.tvar;
        out[i].a = p.a;
        out[i].order = order;
        Expr cur = unknown(p.unknowns[i], 0, 0);
        for (int n = 0; n <= order; ++n) {
            out[i].k.push_back(bind(cur));
            if (n < order) cur = ddt(cur);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

struct NumericTrajectory {
    std::vector<double> t;
    std::vector<std::vector<double>> values; // values[step][unknown]
    double step = 0;
    std::string method = "rk4";
};

inline NumericTrajectory rk4_solve(const Problem& p, const std::vector<double>& init,
                                   double t_end, int steps, const Bindings& extra = {}) {
    if (p.is_pde())
        throw std::invalid_argument("rk4_solve: numeric integration covers ODE systems only");
    if (!p.first_order())
        throw std::invalid_argument("rk4_solve: reduce the problem to first order");
    if (init.size() != p.dim())
        throw std::invalid_argument("rk4_solve: wrong initial vector size");
    if (steps < 1) throw std::invalid_argument("rk4_solve: steps must be positive");

    const double t0 = p.a.to_double();
    const double h = (t_end - t0) / steps;

    auto f = [&](double t, const std::vector<double>& y, std::vector<double>& dy) {
        Bindings b = extra;
        b[sym_atom(p.tvar)] = t;
        for (size_t i = 0; i < p.dim(); ++i) b[unknown_atom(p.unknowns[i], 0, 0)] = y[i];
        for (size_t i = 0; i < p.dim(); ++i) dy[i] = eval_real(p.rhs[i], b);
    };

    NumericTrajectory tr;
    tr.step = h;
    std::vector<double> y = init, k1(p.dim()), k2(p.dim()), k3(p.dim()), k4(p.dim()),
                        tmp(p.dim());
    tr.t.push_back(t0);
    tr.values.push_back(y);
    double t = t0;
    for (int s = 0; s < steps; ++s) {
        f(t, y, k1);
        for (size_t i = 0; i < p.dim(); ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        f(t + 0.5 * h, tmp, k2);
        for (size_t i = 0; i < p.dim(); ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        f(t + 0.5 * h, tmp, k3);
        for (size_t i = 0; i < p.dim(); ++i) tmp[i] = y[i] + h * k3[i];
        f(t + h, tmp, k4);
        for (size_t i = 0; i < p.dim(); ++i)
            y[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        t = t0 + (s + 1) * h;
        for (double v : y)
            if (!std::isfinite(v))
                throw std::runtime_error("rk4_solve: solution blew up near t = " +
                                         std::to_string(t));
        tr.t.push_back(t);
        tr.values.push_back(y);
    }
    return tr;
}

// ---------------------------------------------------------------------------

struct ComparisonRow {
    double t = 0, series = 0, reference = 0, abs_err = 0, rel_err = 0;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    double max_abs = 0, max_rel = 0;
    double tol = 0;
    int steps = 0;
    bool pass = false;
};

namespace detail {

inline ComparisonReport compare_values(const std::function<double(double)>& series_at,
                                       const Problem& first_order,
                                       const std::vector<double>& init,
                                       const std::vector<double>& samples, double tol, int steps,
                                       const Bindings& extra) {
    ComparisonReport rep;
    rep.tol = tol;
    rep.steps = steps;
    const double t0 = first_order.a.to_double();
    for (double t : samples) {
        double ref;
        if (t == t0) {
            ref = init[0];
        } else {
            NumericTrajectory tr = rk4_solve(first_order, init, t, steps, extra);
            ref = tr.values.back()[0];
        }
        ComparisonRow row;
        row.t = t;
        row.series = series_at(t);
        row.reference = ref;
        row.abs_err = std::abs(row.series - ref);
        row.rel_err = ref != 0.0 ? row.abs_err / std::abs(ref) : row.abs_err;
        rep.max_abs = std::max(rep.max_abs, row.abs_err);
        rep.max_rel = std::max(rep.max_rel, row.rel_err);
        rep.rows.push_back(row);
    }
    rep.pass = rep.max_rel <= tol;
    return rep;
}

} // namespace detail

// Evaluate the truncated series under numeric bindings for its data symbols
// and score it against the RK4 reference of the problem.
inline ComparisonReport compare_series_numeric(const SeriesSolution& s, const Problem& p,
                                               const Bindings& data,
                                               const std::vector<double>& samples, double tol,
                                               int steps = 1000) {
    Problem sys = reduce_to_first_order(p);
    std::vector<double> init;
    for (size_t i = 0; i < sys.dim(); ++i) init.push_back(eval_real(sys.inits[i][0], data));
    Expr poly = series_polynomial(s);
    auto series_at = [&](double t) {
        Bindings b = data;
        b[sym_atom(s.tvar)] = t;
        return eval_real(poly, b);
    };
    return detail::compare_values(series_at, sys, init, samples, tol, steps, data);
}

inline ComparisonReport compare_series_numeric(const GeneralizedSeries& g, const Problem& p,
                                               const Bindings& data,
                                               const std::vector<double>& samples, double tol,
                                               int steps = 1000) {
    Problem sys = reduce_to_first_order(p);
    std::vector<double> init;
    for (size_t i = 0; i < sys.dim(); ++i) init.push_back(eval_real(sys.inits[i][0], data));
    Expr poly = series_polynomial(g);
    auto series_at = [&](double t) {
        Bindings b = data;
        b[sym_atom(g.tvar)] = t;
        return eval_real(poly, b);
    };
    return detail::compare_values(series_at, sys, init, samples, tol, steps, data);
}

inline std::string to_csv(const ComparisonReport& rep) {
    std::ostringstream os;
    os.precision(15);
    os << "t,series_value,reference_value,abs_err,rel_err\n";
    for (const auto& r : rep.rows)
        os << r.t << "," << r.series << "," << r.reference << "," << r.abs_err << ","
           << r.rel_err << "\n";
    return os.str();
}

} // namespace opexp
