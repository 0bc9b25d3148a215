#pragma once

#include "mom/errors.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace mom {

using Exponent = std::vector<int>;

/// Graded lexicographic order: lower total degree first, ties broken
/// lexicographically with x0 most significant.
struct GrlexLess {
    bool operator()(const Exponent& a, const Exponent& b) const {
        const int da = std::accumulate(a.begin(), a.end(), 0);
        const int db = std::accumulate(b.begin(), b.end(), 0);
        if (da != db) return da < db;
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    }
};

/// Dense multivariate polynomial stored as a map from exponent vectors to
/// coefficients. Terms with an exactly zero coefficient are never stored.
template <typename Scalar>
class MultiPoly {
public:
    using TermMap = std::map<Exponent, Scalar, GrlexLess>;

    explicit MultiPoly(int nvars = 0) : nvars_(nvars) {
        if (nvars < 0) throw ParameterError("negative variable count");
    }

    static MultiPoly constant(int nvars, Scalar c) {
        MultiPoly p(nvars);
        p.add_term(Exponent(static_cast<std::size_t>(nvars), 0), c);
        return p;
    }

    static MultiPoly variable(int nvars, int var) {
        if (var < 0 || var >= nvars) throw ParameterError("variable index out of range");
        MultiPoly p(nvars);
        Exponent e(static_cast<std::size_t>(nvars), 0);
        e[static_cast<std::size_t>(var)] = 1;
        p.add_term(e, Scalar(1));
        return p;
    }

    int nvars() const { return nvars_; }
    const TermMap& terms() const { return terms_; }
    std::size_t num_terms() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }

    /// Total degree; -1 for the zero polynomial.
    int degree() const {
        if (terms_.empty()) return -1;
        const Exponent& e = terms_.rbegin()->first;
        return std::accumulate(e.begin(), e.end(), 0);
    }

    Scalar coefficient(const Exponent& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? Scalar(0) : it->second;
    }

    void add_term(const Exponent& e, Scalar c) {
        if (static_cast<int>(e.size()) != nvars_) throw ParameterError("exponent length does not match nvars");
        for (int k : e)
            if (k < 0) throw ParameterError("negative exponent");
        if (c == Scalar(0)) return;
        auto [it, inserted] = terms_.try_emplace(e, c);
        if (!inserted) {
            it->second += c;
            if (it->second == Scalar(0)) terms_.erase(it);
        }
    }

    double max_abs_coefficient() const {
        double m = 0.0;
        for (const auto& [e, c] : terms_) m = std::max(m, static_cast<double>(std::abs(c)));
        return m;
    }

    /// Drops terms with |c| < rel_tol * max|c|.
    MultiPoly pruned(double rel_tol) const {
        const double cut = rel_tol * max_abs_coefficient();
        MultiPoly out(nvars_);
        for (const auto& [e, c] : terms_)
            if (std::abs(c) >= cut) out.terms_.emplace(e, c);
        return out;
    }

    MultiPoly& operator+=(const MultiPoly& q) {
        check_same(q);
        for (const auto& [e, c] : q.terms_) add_term(e, c);
        return *this;
    }

    MultiPoly& operator-=(const MultiPoly& q) {
        check_same(q);
        for (const auto& [e, c] : q.terms_) add_term(e, -c);
        return *this;
    }

    MultiPoly& operator*=(Scalar s) {
        if (s == Scalar(0)) {
            terms_.clear();
            return *this;
        }
        for (auto it = terms_.begin(); it != terms_.end();) {
            it->second *= s;
            it = it->second == Scalar(0) ? terms_.erase(it) : std::next(it);
        }
        return *this;
    }

    friend MultiPoly operator+(MultiPoly p, const MultiPoly& q) { return p += q; }
    friend MultiPoly operator-(MultiPoly p, const MultiPoly& q) { return p -= q; }
    friend MultiPoly operator-(MultiPoly p) { return p *= Scalar(-1); }
    friend MultiPoly operator*(MultiPoly p, Scalar s) { return p *= s; }
    friend MultiPoly operator*(Scalar s, MultiPoly p) { return p *= s; }

    friend MultiPoly operator*(const MultiPoly& p, const MultiPoly& q) {
        p.check_same(q);
        MultiPoly out(p.nvars_);
        Exponent e(static_cast<std::size_t>(p.nvars_));
        for (const auto& [ea, ca] : p.terms_)
            for (const auto& [eb, cb] : q.terms_) {
                for (std::size_t v = 0; v < e.size(); ++v) e[v] = ea[v] + eb[v];
                out.add_term(e, ca * cb);
            }
        return out;
    }

    MultiPoly& operator*=(const MultiPoly& q) { return *this = *this * q; }

    friend bool operator==(const MultiPoly& p, const MultiPoly& q) {
        return p.nvars_ == q.nvars_ && p.terms_ == q.terms_;
    }

    /// Casts coefficients to another scalar type (e.g. real to complex).
    template <typename Other>
    MultiPoly<Other> cast() const {
        MultiPoly<Other> out(nvars_);
        for (const auto& [e, c] : terms_) out.add_term(e, Other(c));
        return out;
    }

    void check_same(const MultiPoly& q) const {
        if (nvars_ != q.nvars_)
            throw ParameterError("polynomial variable counts differ (" + std::to_string(nvars_) + " vs " +
                                 std::to_string(q.nvars_) + ")");
    }

private:
    int nvars_;
    TermMap terms_;
};

using Poly = MultiPoly<std::complex<double>>;

/// Square or rectangular list of polynomials sharing one variable count.
template <typename Scalar>
struct PolySystem {
    int nvars = 0;
    std::vector<MultiPoly<Scalar>> polys;

    PolySystem() = default;
    PolySystem(int nv, std::vector<MultiPoly<Scalar>> ps) : nvars(nv), polys(std::move(ps)) {
        for (const auto& p : polys)
            if (p.nvars() != nvars) throw ParameterError("system polynomials must share nvars");
    }

    std::size_t size() const { return polys.size(); }
    bool is_square() const { return static_cast<int>(polys.size()) == nvars; }
};

using System = PolySystem<std::complex<double>>;

template <typename Scalar>
MultiPoly<Scalar> add(const MultiPoly<Scalar>& p, const MultiPoly<Scalar>& q) {
    return p + q;
}

template <typename Scalar>
MultiPoly<Scalar> mul(const MultiPoly<Scalar>& p, const MultiPoly<Scalar>& q) {
    return p * q;
}

template <typename Scalar>
MultiPoly<Scalar> pow(const MultiPoly<Scalar>& p, int k) {
    if (k < 0) throw ParameterError("negative polynomial power");
    MultiPoly<Scalar> out = MultiPoly<Scalar>::constant(p.nvars(), Scalar(1));
    for (int i = 0; i < k; ++i) out *= p;
    return out;
}

template <typename Scalar>
MultiPoly<Scalar> differentiate(const MultiPoly<Scalar>& p, int var) {
    if (var < 0 || var >= p.nvars()) throw ParameterError("differentiation variable out of range");
    const auto v = static_cast<std::size_t>(var);
    MultiPoly<Scalar> out(p.nvars());
    for (const auto& [e, c] : p.terms()) {
        if (e[v] == 0) continue;
        Exponent d = e;
        --d[v];
        out.add_term(d, c * Scalar(e[v]));
    }
    return out;
}

/// Term-sum evaluation with a per-variable power table.
template <typename Scalar, typename Derived>
auto evaluate(const MultiPoly<Scalar>& p, const Eigen::MatrixBase<Derived>& point) {
    using Value = decltype(Scalar() * typename Derived::Scalar());
    if (point.size() != p.nvars()) throw ParameterError("evaluation point has wrong length");
    const int deg = std::max(p.degree(), 0);
    std::vector<std::vector<Value>> powers(static_cast<std::size_t>(p.nvars()));
    for (int v = 0; v < p.nvars(); ++v) {
        auto& row = powers[static_cast<std::size_t>(v)];
        row.resize(static_cast<std::size_t>(deg) + 1);
        row[0] = Value(1);
        for (int k = 1; k <= deg; ++k) row[static_cast<std::size_t>(k)] = row[static_cast<std::size_t>(k) - 1] * Value(point(v));
    }
    Value sum(0);
    for (const auto& [e, c] : p.terms()) {
        Value term(c);
        for (std::size_t v = 0; v < e.size(); ++v) term *= powers[v][static_cast<std::size_t>(e[v])];
        sum += term;
    }
    return sum;
}

/// |p(x)| / sum_t |c_t x^t|: the relative size of the residual against the
/// terms that produced it. Zero when every term vanishes.
template <typename Scalar, typename Derived>
double backward_error(const MultiPoly<Scalar>& p, const Eigen::MatrixBase<Derived>& point) {
    if (point.size() != p.nvars()) throw ParameterError("evaluation point has wrong length");
    double scale = 0.0;
    for (const auto& [e, c] : p.terms()) {
        double term = std::abs(c);
        for (std::size_t v = 0; v < e.size(); ++v) term *= std::pow(std::abs(point(static_cast<Eigen::Index>(v))), e[v]);
        scale += term;
    }
    const double value = std::abs(evaluate(p, point));
    return scale > 0.0 ? value / scale : value;
}

/// Largest per-polynomial backward error of a system.
template <typename Scalar, typename Derived>
double backward_error(const PolySystem<Scalar>& sys, const Eigen::MatrixBase<Derived>& point) {
    double worst = 0.0;
    for (const auto& p : sys.polys) worst = std::max(worst, backward_error(p, point));
    return worst;
}

/// Substitutes subs[v] for variable v. The result lives in the variables of
/// the substitutions.
template <typename Scalar>
MultiPoly<Scalar> compose(const MultiPoly<Scalar>& p, const std::vector<MultiPoly<Scalar>>& subs) {
    if (static_cast<int>(subs.size()) != p.nvars())
        throw ParameterError("compose needs one substitution per variable");
    if (subs.empty()) return p;
    const int nv = subs.front().nvars();
    for (const auto& s : subs)
        if (s.nvars() != nv) throw ParameterError("substitutions must share nvars");

    const int deg = std::max(p.degree(), 0);
    std::vector<std::vector<MultiPoly<Scalar>>> powers(subs.size());
    for (std::size_t v = 0; v < subs.size(); ++v) {
        powers[v].push_back(MultiPoly<Scalar>::constant(nv, Scalar(1)));
        for (int k = 1; k <= deg; ++k) powers[v].push_back(powers[v].back() * subs[v]);
    }
    MultiPoly<Scalar> out(nv);
    for (const auto& [e, c] : p.terms()) {
        MultiPoly<Scalar> term = MultiPoly<Scalar>::constant(nv, c);
        for (std::size_t v = 0; v < e.size(); ++v)
            if (e[v] > 0) term *= powers[v][static_cast<std::size_t>(e[v])];
        out += term;
    }
    return out;
}

/// Entry (k, v) is d polys[k] / d x_v.
template <typename Scalar>
std::vector<std::vector<MultiPoly<Scalar>>> jacobian(const PolySystem<Scalar>& sys) {
    std::vector<std::vector<MultiPoly<Scalar>>> J;
    J.reserve(sys.size());
    for (const auto& p : sys.polys) {
        std::vector<MultiPoly<Scalar>> row;
        for (int v = 0; v < sys.nvars; ++v) row.push_back(differentiate(p, v));
        J.push_back(std::move(row));
    }
    return J;
}

namespace detail {

inline void format_coefficient(std::ostream& os, double c) { os << c; }

inline void format_coefficient(std::ostream& os, const std::complex<double>& c) {
    if (c.imag() == 0.0)
        os << c.real();
    else
        os << "(" << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i)";
}

}  // namespace detail

/// Human-readable form with terms in descending graded-lex order, e.g.
/// `2*x0^2*x1 + -1`. Coefficients use 17 significant digits so goldens are exact.
template <typename Scalar>
std::string to_string(const MultiPoly<Scalar>& p) {
    if (p.is_zero()) return "0";
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
        if (!first) os << " + ";
        first = false;
        detail::format_coefficient(os, it->second);
        for (std::size_t v = 0; v < it->first.size(); ++v) {
            const int k = it->first[v];
            if (k == 0) continue;
            os << "*x" << v;
            if (k > 1) os << "^" << k;
        }
    }
    return os.str();
}

template <typename Scalar>
std::string to_string(const PolySystem<Scalar>& sys) {
    std::ostringstream os;
    for (std::size_t k = 0; k < sys.polys.size(); ++k) os << "f" << k << " = " << to_string(sys.polys[k]) << "\n";
    return os.str();
}

}  // namespace mom
