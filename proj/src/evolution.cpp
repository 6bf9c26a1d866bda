#include "cavity/evolution.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "cavity/errors.hpp"

namespace cavity {

SuperoperatorParams superop_params(double Omega, double Lambda, double Nexc) {
    if (Nexc < -1e-10) throw ValidationError("Nexc", "negative thermal occupation N(t) in trajectory");
    Nexc = std::max(Nexc, 0.0);
    SuperoperatorParams p{};
    const double onep = 1.0 + Nexc;
    p.v = 1.0 / onep;
    p.w = Nexc / onep;
    p.x = cplx(-Lambda - std::log1p(Nexc), -Omega);
    p.y = std::conj(p.x);
    const double decay = std::exp(-2.0 * Lambda);
    p.z = 1.0 - decay / onep;
    // z' = z e^{-(x+y)} = (1+N)((1+N) e^{2 Lambda} - 1)
    p.zprime = onep * (onep * std::exp(2.0 * Lambda) - 1.0);
    p.Omega = Omega;
    p.Lambda = Lambda;
    p.Nexc = Nexc;
    return p;
}

SuperoperatorParams superop_params(const CoefficientTrajectory& traj, double t) {
    const auto s = sample(traj, t);
    return superop_params(s.Omega, s.Lambda, s.Nexc);
}

namespace {

// e^{cJ} op: out(i,j) = sum_k c^k/k! sqrt((i+k)!/i! (j+k)!/j!) op(i+k, j+k)
Eigen::MatrixXcd lower(const Eigen::MatrixXcd& op, double c) {
    const Eigen::Index d = op.rows();
    if (c == 0.0) return op;
    Eigen::MatrixXcd out(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
            cplx acc = op(i, j);
            double coef = 1.0;
            for (Eigen::Index k = 1; i + k < d && j + k < d; ++k) {
                coef *= c / static_cast<double>(k) * std::sqrt(static_cast<double>((i + k) * (j + k)));
                acc += coef * op(i + k, j + k);
            }
            out(i, j) = acc;
        }
    return out;
}

// e^{cR} op truncated at the cutoff: out(i,j) = sum_k c^k/k! sqrt(i!/(i-k)! j!/(j-k)!) op(i-k, j-k)
Eigen::MatrixXcd raise(const Eigen::MatrixXcd& op, double c) {
    const Eigen::Index d = op.rows();
    if (c == 0.0) return op;
    Eigen::MatrixXcd out(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
            cplx acc = op(i, j);
            double coef = 1.0;
            for (Eigen::Index k = 1; k <= i && k <= j; ++k) {
                coef *= c / static_cast<double>(k) * std::sqrt(static_cast<double>((i - k + 1) * (j - k + 1)));
                acc += coef * op(i - k, j - k);
            }
            out(i, j) = acc;
        }
    return out;
}

// Trace that e^{cR} would have pushed above the cutoff, given the diagonal it acts on.
double raise_leakage(const Eigen::MatrixXcd& op, double c) {
    if (c == 0.0) return 0.0;
    const Eigen::Index d = op.rows();
    double lost = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
        const double dj = op(j, j).real();
        if (dj == 0.0) continue;
        // full: sum_l C(j+l, l) c^l = (1-c)^{-(j+1)}
        double kept = 0.0, term = 1.0;
        for (Eigen::Index l = 0; j + l < d; ++l) {
            if (l > 0) term *= c * static_cast<double>(j + l) / static_cast<double>(l);
            kept += term;
        }
        lost += dj * (std::pow(1.0 - c, -static_cast<double>(j + 1)) - kept);
    }
    return lost;
}

void scale_number(Eigen::MatrixXcd& op, cplx x, cplx y) {
    const Eigen::Index d = op.rows();
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) op(i, j) *= std::exp(x * static_cast<double>(i) + y * static_cast<double>(j));
}

}  // namespace

Eigen::MatrixXcd apply_matrix(const SuperoperatorParams& p, const Eigen::MatrixXcd& op, Ordering order,
                              ApplyReport* report) {
    if (op.rows() != op.cols()) throw ValidationError("rho", "operator must be square");
    if (op.rows() == 1 && p.w > 0.0)
        throw ValidationError("cutoff", "cutoff 0 with w > 0: the raising factor truncates everything");
    Eigen::MatrixXcd tmp;
    if (order == Ordering::Default) {
        tmp = lower(op, p.z);
        scale_number(tmp, p.x, p.y);
    } else {
        tmp = op;
        scale_number(tmp, p.x, p.y);
        tmp = lower(tmp, p.zprime);
    }
    if (report) report->leakage = p.v * raise_leakage(tmp, p.w);
    return p.v * raise(tmp, p.w);
}

FockDensityMatrix apply(const SuperoperatorParams& p, const FockDensityMatrix& rho, Ordering order,
                        ApplyReport* report) {
    return FockDensityMatrix(apply_matrix(p, rho.matrix(), order, report));
}

std::vector<NaturalOrbit> natural_orbits(const FockDensityMatrix& rho) {
    Eigen::MatrixXcd herm = 0.5 * (rho.matrix() + rho.matrix().adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
    if (es.info() != Eigen::Success)
        throw NumericalError(NumericalError::Kind::Convergence, "natural-orbit eigendecomposition failed");
    std::vector<NaturalOrbit> out;
    const auto n = es.eigenvalues().size();
    out.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = n - 1; i >= 0; --i) out.push_back({es.eigenvalues()(i), es.eigenvectors().col(i)});
    return out;
}

Moments moments(const FockDensityMatrix& rho) {
    Moments m{};
    const int d = rho.dim();
    for (int n = 0; n < d; ++n) {
        const double p = rho(n, n).real();
        m.mean_n += n * p;
        m.mean_anticomm += (2.0 * n + 1.0) * p;
        if (n + 1 < d) m.mean_a += std::sqrt(n + 1.0) * rho(n + 1, n);
        if (n + 2 < d) m.mean_a2 += std::sqrt((n + 1.0) * (n + 2.0)) * rho(n + 2, n);
    }
    return m;
}

cplx normal_ordered_expectation(const FockDensityMatrix& rho, cplx u, cplx v) {
    // Tr e^{u a^dag} e^{v a} rho = sum_{m,n} rho(n,m) <m|e^{u a^dag} e^{v a}|n>
    //   <m|e^{u a^dag}|k> = u^{m-k}/(m-k)! sqrt(m!/k!),  <k|e^{v a}|n> = v^{n-k}/(n-k)! sqrt(n!/k!)
    const int d = rho.dim();
    Eigen::MatrixXcd Eu = Eigen::MatrixXcd::Zero(d, d), Ev = Eigen::MatrixXcd::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        cplx cu = 1.0, cv = 1.0;
        Eu(k, k) = 1.0;
        Ev(k, k) = 1.0;
        for (int j = 1; k + j < d; ++j) {
            const double s = std::sqrt(static_cast<double>(k + j)) / j;
            cu *= u * s;
            cv *= v * s;
            Eu(k + j, k) = cu;
            Ev(k, k + j) = cv;
        }
    }
    return (Eu * Ev * rho.matrix()).trace();
}

cplx characteristic_fn(const FockDensityMatrix& rho0, double Omega, double Lambda, double Nexc, cplx xi) {
    const cplx I(0.0, 1.0);
    const cplx rot = std::exp(cplx(-Lambda, Omega));
    return std::exp(-Nexc * std::norm(xi)) * normal_ordered_expectation(rho0, I * xi * rot, I * std::conj(xi) * std::conj(rot));
}

cplx characteristic_fn(const FockDensityMatrix& rho0, const CoefficientTrajectory& traj, double t, cplx xi) {
    const auto s = sample(traj, t);
    return characteristic_fn(rho0, s.Omega, s.Lambda, s.Nexc, xi);
}

}  // namespace cavity
