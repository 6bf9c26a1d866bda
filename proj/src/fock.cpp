#include "cavity/fock.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "cavity/errors.hpp"

namespace cavity {

FockDensityMatrix::FockDensityMatrix(int cutoff) {
    if (cutoff < 0) throw ValidationError("cutoff", "cutoff must be nonnegative");
    rho_ = Eigen::MatrixXcd::Zero(cutoff + 1, cutoff + 1);
}

FockDensityMatrix::FockDensityMatrix(Eigen::MatrixXcd rho) : rho_(std::move(rho)) {
    if (rho_.rows() != rho_.cols() || rho_.rows() == 0)
        throw ValidationError("rho", "density matrix must be square and nonempty");
}

double FockDensityMatrix::top_population(int levels) const {
    double p = 0.0;
    for (int i = std::max(0, dim() - levels); i < dim(); ++i) p += std::abs(rho_(i, i).real());
    return p;
}

double FockDensityMatrix::purity() const { return (rho_ * rho_).trace().real(); }

double FockDensityMatrix::hermiticity_error() const { return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }

double FockDensityMatrix::min_eigenvalue() const {
    Eigen::MatrixXcd herm = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

void FockDensityMatrix::validate(double tol_herm, double tol_trace, double tol_pos) const {
    if (hermiticity_error() > tol_herm) throw ValidationError("rho", "density matrix is not Hermitian");
    if (std::abs(trace() - 1.0) > tol_trace) throw ValidationError("rho", "density matrix trace is not 1");
    if (min_eigenvalue() < -tol_pos) throw ValidationError("rho", "density matrix has a negative eigenvalue");
}

FockDensityMatrix FockDensityMatrix::resized(int cutoff) const {
    FockDensityMatrix out(cutoff);
    const int n = std::min(dim(), out.dim());
    out.rho_.topLeftCorner(n, n) = rho_.topLeftCorner(n, n);
    return out;
}

FockDensityMatrix number_state(int m, int cutoff) {
    if (m < 0 || m > cutoff) throw ValidationError("state.n", "number state outside cutoff");
    FockDensityMatrix rho(cutoff);
    rho.matrix()(m, m) = 1.0;
    return rho;
}

FockDensityMatrix vacuum(int cutoff) { return number_state(0, cutoff); }

FockDensityMatrix from_ket(const Eigen::VectorXcd& ket) { return FockDensityMatrix(ket * ket.adjoint()); }

Eigen::VectorXcd coherent_ket(cplx sigma, int cutoff) {
    Eigen::VectorXcd v(cutoff + 1);
    v(0) = std::exp(-0.5 * std::norm(sigma));
    for (int n = 1; n <= cutoff; ++n) v(n) = v(n - 1) * sigma / std::sqrt(static_cast<double>(n));
    return v;
}

Eigen::MatrixXcd displacement_matrix(cplx beta, int dim) {
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(dim, dim);
    const double r = std::abs(beta);
    if (r == 0.0) return Eigen::MatrixXcd::Identity(dim, dim);
    const double x = r * r;
    const cplx u = beta / r;
    // <n+k|D|n> = e^{-x/2} beta^k sqrt(n!/(n+k)!) L_n^{(k)}(x), by the normalized Laguerre
    // recurrence in n (stable forward); <n|D|n+k> = (-1)^k conj(...).
    std::vector<double> h(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) {
        const int len = dim - k;
        h[0] = std::exp(-0.5 * x + k * std::log(r) - 0.5 * std::lgamma(k + 1.0));
        if (len > 1) h[1] = h[0] * (1.0 + k - x) / std::sqrt(k + 1.0);
        for (int n = 1; n + 1 < len; ++n)
            h[n + 1] = ((2.0 * n + 1.0 + k - x) * h[n] - std::sqrt(static_cast<double>(n) * (n + k)) * h[n - 1]) /
                       std::sqrt((n + 1.0) * (n + k + 1.0));
        const cplx lower_phase = std::pow(u, k);
        const cplx upper_phase = std::pow(-std::conj(u), k);
        for (int n = 0; n < len; ++n) {
            D(n + k, n) = h[n] * lower_phase;
            if (k > 0) D(n, n + k) = h[n] * upper_phase;
        }
    }
    return D;
}

Eigen::MatrixXcd expm_antihermitian(const Eigen::MatrixXcd& generator) {
    const cplx I(0.0, 1.0);
    Eigen::MatrixXcd herm = I * generator;
    herm = 0.5 * (herm + herm.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
    if (es.info() != Eigen::Success)
        throw NumericalError(NumericalError::Kind::Convergence, "Hermitian eigendecomposition failed");
    Eigen::VectorXcd phase(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < phase.size(); ++i) phase(i) = std::polar(1.0, -es.eigenvalues()(i));
    return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::MatrixXcd squeeze_matrix(cplx zeta, int dim, int pad) {
    const int big = dim + std::max(pad, 0);
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(big, big);
    // (zeta a^dag^2 - conj(zeta) a^2) / 4
    for (int n = 0; n + 2 < big; ++n) {
        const double amp = std::sqrt((n + 1.0) * (n + 2.0));
        G(n + 2, n) += 0.25 * zeta * amp;
        G(n, n + 2) -= 0.25 * std::conj(zeta) * amp;
    }
    return expm_antihermitian(G).topLeftCorner(dim, dim);
}

Eigen::MatrixXcd displace(const Eigen::MatrixXcd& rho, cplx sigma, int out_dim) {
    const int in_dim = static_cast<int>(rho.rows());
    const int big = std::max(in_dim, out_dim);
    const Eigen::MatrixXcd D = displacement_matrix(sigma, big).topLeftCorner(out_dim, in_dim);
    return D * rho * D.adjoint();
}

FockDensityMatrix displace(const FockDensityMatrix& rho, cplx sigma, int out_cutoff) {
    const int out_dim = (out_cutoff >= 0 ? out_cutoff : rho.cutoff()) + 1;
    return FockDensityMatrix(displace(rho.matrix(), sigma, out_dim));
}

double trace_distance(const FockDensityMatrix& a, const FockDensityMatrix& b) {
    const int dim = std::max(a.dim(), b.dim());
    Eigen::MatrixXcd diff = a.resized(dim - 1).matrix() - b.resized(dim - 1).matrix();
    diff = 0.5 * (diff + diff.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(diff, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

void to_json(nlohmann::json& j, const FockDensityMatrix& rho) {
    const int d = rho.dim();
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (int m = 0; m < d; ++m) {
        nlohmann::json rr = nlohmann::json::array(), ii = nlohmann::json::array();
        for (int n = 0; n < d; ++n) {
            rr.push_back(rho(m, n).real());
            ii.push_back(rho(m, n).imag());
        }
        re.push_back(std::move(rr));
        im.push_back(std::move(ii));
    }
    j = nlohmann::json{{"cutoff", rho.cutoff()}, {"rho_re", std::move(re)}, {"rho_im", std::move(im)}};
}

FockDensityMatrix density_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("cutoff")) throw ValidationError("rho.cutoff", "missing cutoff");
    if (!j["cutoff"].is_number_integer()) throw ValidationError("rho.cutoff", "cutoff must be an integer");
    const int cutoff = j["cutoff"].get<int>();
    FockDensityMatrix rho(cutoff);
    for (const char* key : {"rho_re", "rho_im"}) {
        if (!j.contains(key) || !j[key].is_array() || static_cast<int>(j[key].size()) != cutoff + 1)
            throw ValidationError(std::string("rho.") + key, "expected (cutoff+1) rows");
        for (int m = 0; m <= cutoff; ++m) {
            const auto& row = j[key][static_cast<std::size_t>(m)];
            if (!row.is_array() || static_cast<int>(row.size()) != cutoff + 1)
                throw ValidationError(std::string("rho.") + key, "expected (cutoff+1) columns");
            for (int n = 0; n <= cutoff; ++n) {
                if (!row[static_cast<std::size_t>(n)].is_number())
                    throw ValidationError(std::string("rho.") + key, "entries must be numbers");
                const double v = row[static_cast<std::size_t>(n)].get<double>();
                if (key[4] == 'r')
                    rho.matrix()(m, n).real(v);
                else
                    rho.matrix()(m, n).imag(v);
            }
        }
    }
    return rho;
}

}  // namespace cavity
