#include "cavity/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_map>

#include "cavity/errors.hpp"
#include "cavity/parallel.hpp"
#include "cavity/propagator.hpp"

namespace cavity {

namespace {

constexpr std::size_t kMaxBlockDimension = 4000;
constexpr std::size_t kMaxConfigurations = 200000;

using Occupation = std::vector<int>;

struct WeightedConfig {
    Occupation n;
    double weight;
};

// Bath Fock configurations in descending product-geometric weight. Children of a node
// increment one coordinate at or after its last incremented one, so each configuration
// is generated once and never before its parent.
std::vector<WeightedConfig> thermal_configurations(const BathSpec& bath, int mode_cutoff, double tail) {
    const std::size_t M = bath.size();
    std::vector<double> x(M);
    double w0 = 1.0;
    for (std::size_t k = 0; k < M; ++k) {
        x[k] = bath.zero_temperature() ? 0.0 : std::exp(-bath.inverse_temperature() * bath.modes()[k].frequency);
        w0 *= 1.0 - x[k];
    }
    struct Node {
        double weight;
        Occupation n;
        std::size_t last;
        bool operator<(const Node& o) const { return weight < o.weight; }
    };
    std::priority_queue<Node> queue;
    queue.push({w0, Occupation(M, 0), 0});
    std::vector<WeightedConfig> out;
    double mass = 0.0;
    while (!queue.empty() && 1.0 - mass >= tail) {
        Node node = queue.top();
        queue.pop();
        mass += node.weight;
        for (std::size_t j = node.last; j < M; ++j) {
            if (x[j] == 0.0) continue;
            if (mode_cutoff >= 0 && node.n[j] + 1 > mode_cutoff) continue;
            Node child{node.weight * x[j], node.n, j};
            ++child.n[j];
            queue.push(std::move(child));
        }
        out.push_back({std::move(node.n), node.weight});
        if (out.size() > kMaxConfigurations)
            throw NumericalError(NumericalError::Kind::Convergence, "thermal bath mixture needs too many configurations");
    }
    if (1.0 - mass >= tail)
        throw NumericalError(NumericalError::Kind::Convergence,
                             "thermal tail does not fall below the requested mass at the mode cutoff");
    return out;
}

std::uint64_t encode(const int* n, std::size_t count, std::uint64_t base) {
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < count; ++i) key = key * base + static_cast<std::uint64_t>(n[i]);
    return key;
}

// Excitation block K: all (n0, n1..nM) with sum K and bath entries within the cutoff.
struct Block {
    int K = 0;
    std::vector<Occupation> basis;
    std::unordered_map<std::uint64_t, int> index;  // full occupation -> position
    std::vector<int> system_level;
    std::vector<int> bath_index;  // dense id of the bath part
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;
};

void enumerate(int remaining, std::size_t pos, Occupation& n, int mode_cutoff, std::vector<Occupation>& out) {
    if (pos + 1 == n.size()) {
        if (pos > 0 && mode_cutoff >= 0 && remaining > mode_cutoff) return;
        n[pos] = remaining;
        out.push_back(n);
        return;
    }
    const int cap = (pos > 0 && mode_cutoff >= 0) ? std::min(remaining, mode_cutoff) : remaining;
    for (int v = 0; v <= cap; ++v) {
        n[pos] = v;
        enumerate(remaining - v, pos + 1, n, mode_cutoff, out);
    }
}

}  // namespace

struct ManyBodyOracle::Impl {
    std::vector<WeightedConfig> configs;
    std::map<int, Block> blocks;
    std::uint64_t base = 1;
    std::size_t total_dim = 0;
    std::size_t bath_count = 0;
};

void validate(const ManyBodyConfig& cfg) {
    if (cfg.bath.size() > kMaxOracleModes) throw ValidationError("oracle.modes", "oracle supports at most 4 bath modes");
    if (!(cfg.thermal_tail > 0.0 && cfg.thermal_tail < 1.0))
        throw ValidationError("oracle.thermal_tail", "thermal tail must be in (0, 1)");
    if (cfg.mode_cutoff < -1) throw ValidationError("oracle.mode_cutoff", "mode cutoff must be >= 0 or -1");
    cfg.initial.validate(1e-10, 1e-8, 1e-10);
}

ManyBodyOracle::ManyBodyOracle(ManyBodyConfig cfg) : cfg_(std::move(cfg)), impl_(std::make_unique<Impl>()) {
    validate(cfg_);
    const std::size_t M = cfg_.bath.size();
    const int Ns = cfg_.initial.cutoff();
    if (cfg_.bath_state == BathState::Vacuum || cfg_.bath.zero_temperature())
        impl_->configs.push_back({Occupation(M, 0), 1.0});
    else
        impl_->configs = thermal_configurations(cfg_.bath, cfg_.mode_cutoff, cfg_.thermal_tail);

    int max_bath = 0;
    std::vector<bool> needed;
    for (const auto& c : impl_->configs) {
        int s = 0;
        for (int v : c.n) s += v;
        max_bath = std::max(max_bath, s);
        if (needed.size() < static_cast<std::size_t>(s + Ns + 1)) needed.resize(static_cast<std::size_t>(s + Ns + 1), false);
        for (int K = s; K <= s + Ns; ++K) needed[static_cast<std::size_t>(K)] = true;
    }
    impl_->base = static_cast<std::uint64_t>(needed.size()) + 1;

    // Enumerate first so the dimension guard fires before any diagonalization.
    for (std::size_t K = 0; K < needed.size(); ++K) {
        if (!needed[K]) continue;
        Block b;
        b.K = static_cast<int>(K);
        Occupation n(M + 1, 0);
        enumerate(b.K, 0, n, cfg_.mode_cutoff, b.basis);
        impl_->total_dim += b.basis.size();
        if (b.basis.size() > kMaxBlockDimension)
            throw ValidationError("oracle.dimension", "excitation block of dimension " +
                                                          std::to_string(b.basis.size()) + " exceeds the oracle limit");
        if (impl_->total_dim > kMaxOracleDimension)
            throw ValidationError("oracle.dimension", "many-body dimension exceeds 1e6");
        impl_->blocks.emplace(b.K, std::move(b));
    }

    std::unordered_map<std::uint64_t, int> bath_ids;
    for (auto& [K, b] : impl_->blocks) {
        b.bath_index.resize(b.basis.size());
        for (std::size_t j = 0; j < b.basis.size(); ++j) {
            const auto key = encode(b.basis[j].data() + 1, M, impl_->base);
            auto [it, fresh] = bath_ids.try_emplace(key, static_cast<int>(bath_ids.size()));
            b.bath_index[j] = it->second;
        }
    }
    impl_->bath_count = bath_ids.size();

    const double w = cfg_.bath.omega();
    const auto& modes = cfg_.bath.modes();
    std::vector<Block*> todo;
    for (auto& [K, b] : impl_->blocks) todo.push_back(&b);
    parallel_for(todo.size(), [&](std::size_t i) {
        Block& b = *todo[i];
        const auto d = static_cast<Eigen::Index>(b.basis.size());
        b.system_level.resize(b.basis.size());
        for (Eigen::Index j = 0; j < d; ++j) {
            const auto& n = b.basis[static_cast<std::size_t>(j)];
            b.index.emplace(encode(n.data(), n.size(), impl_->base), static_cast<int>(j));
            b.system_level[static_cast<std::size_t>(j)] = n[0];
        }
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
        for (Eigen::Index j = 0; j < d; ++j) {
            const auto& n = b.basis[static_cast<std::size_t>(j)];
            double e = w * n[0];
            for (std::size_t k = 0; k < M; ++k) e += modes[k].frequency * n[k + 1];
            H(j, j) = e;
            // a^dag b_k: (n0, nk) -> (n0 + 1, nk - 1)
            for (std::size_t k = 0; k < M; ++k) {
                if (n[k + 1] == 0) continue;
                Occupation m = n;
                ++m[0];
                --m[k + 1];
                auto it = b.index.find(encode(m.data(), m.size(), impl_->base));
                if (it == b.index.end()) continue;
                const double amp = modes[k].coupling * std::sqrt(static_cast<double>(n[0] + 1) * n[k + 1]);
                H(it->second, j) += amp;
                H(j, it->second) += amp;
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        b.energies = es.eigenvalues();
        b.vectors = es.eigenvectors();
    });
}

ManyBodyOracle::~ManyBodyOracle() = default;
ManyBodyOracle::ManyBodyOracle(ManyBodyOracle&&) noexcept = default;
ManyBodyOracle& ManyBodyOracle::operator=(ManyBodyOracle&&) noexcept = default;

std::size_t ManyBodyOracle::configuration_count() const { return impl_->configs.size(); }

double ManyBodyOracle::configuration_weight() const {
    double s = 0.0;
    for (const auto& c : impl_->configs) s += c.weight;
    return s;
}

std::size_t ManyBodyOracle::total_dimension() const { return impl_->total_dim; }

FockDensityMatrix ManyBodyOracle::reduce(double t, std::size_t threads) const {
    return reduce(cfg_.initial, t, threads);
}

FockDensityMatrix ManyBodyOracle::reduce(const FockDensityMatrix& initial, double t, std::size_t threads) const {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ValidationError("t", "time must be finite and non-negative");
    const int Ns = cfg_.initial.cutoff();
    if (initial.cutoff() != Ns) throw ValidationError("cutoff", "initial state cutoff differs from the oracle's");
    initial.validate(1e-10, 1e-8, 1e-10);
    std::vector<NaturalOrbit> orbits;
    for (auto& o : natural_orbits(initial))
        if (o.weight > 1e-15) orbits.push_back(std::move(o));

    const std::size_t M = cfg_.bath.size();
    const auto& configs = impl_->configs;
    const std::size_t n_cfg = configs.size();
    const std::size_t n_lvl = static_cast<std::size_t>(Ns) + 1;

    // Column slot of every initial basis state |m> x |config>; -1 if it lies above the mode cutoff.
    std::vector<int> slot(n_cfg * n_lvl, -1);
    std::vector<int> bath_sum(n_cfg);
    std::map<int, std::vector<int>> columns;  // block K -> basis positions to evolve
    for (std::size_t c = 0; c < n_cfg; ++c) {
        int s = 0;
        for (int v : configs[c].n) s += v;
        bath_sum[c] = s;
        Occupation full(M + 1);
        std::copy(configs[c].n.begin(), configs[c].n.end(), full.begin() + 1);
        for (int m = 0; m <= Ns; ++m) {
            const Block& b = impl_->blocks.at(s + m);
            full[0] = m;
            auto it = b.index.find(encode(full.data(), full.size(), impl_->base));
            if (it == b.index.end()) continue;
            auto& cols = columns[s + m];
            slot[c * n_lvl + static_cast<std::size_t>(m)] = static_cast<int>(cols.size());
            cols.push_back(it->second);
        }
    }

    // psi = V e^{-iEt} V^T e_j for all requested j of a block at once.
    std::vector<int> keys;
    for (const auto& [K, cols] : columns) keys.push_back(K);
    std::map<int, Eigen::MatrixXcd> evolved;
    for (int K : keys) evolved.emplace(K, Eigen::MatrixXcd());
    std::vector<double> norm_err(keys.size(), 0.0);
    parallel_for(
        keys.size(),
        [&](std::size_t i) {
            const Block& b = impl_->blocks.at(keys[i]);
            const auto& cols = columns.at(keys[i]);
            const Eigen::Index d = b.vectors.rows();
            const auto nc = static_cast<Eigen::Index>(cols.size());
            Eigen::MatrixXd re(d, nc), im(d, nc);
            for (Eigen::Index q = 0; q < nc; ++q) {
                const auto row = b.vectors.row(cols[static_cast<std::size_t>(q)]);
                for (Eigen::Index e = 0; e < d; ++e) {
                    re(e, q) = std::cos(b.energies(e) * t) * row(e);
                    im(e, q) = -std::sin(b.energies(e) * t) * row(e);
                }
            }
            Eigen::MatrixXcd psi(d, nc);
            psi.real() = b.vectors * re;
            psi.imag() = b.vectors * im;
            double err = 0.0;
            for (Eigen::Index q = 0; q < nc; ++q) err = std::max(err, std::abs(psi.col(q).squaredNorm() - 1.0));
            norm_err[i] = err;
            evolved.at(keys[i]) = std::move(psi);
        },
        threads);

    std::vector<Eigen::MatrixXcd> partial(n_cfg);
    parallel_for(
        n_cfg,
        [&](std::size_t c) {
            Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(Ns + 1, Ns + 1);
            Eigen::MatrixXcd phi(static_cast<Eigen::Index>(impl_->bath_count), Ns + 1);
            for (const auto& orbit : orbits) {
                phi.setZero();
                for (int m = 0; m <= Ns; ++m) {
                    const int q = slot[c * n_lvl + static_cast<std::size_t>(m)];
                    const cplx c0 = orbit.orbital(m);
                    if (q < 0 || c0 == cplx(0.0)) continue;
                    const Block& b = impl_->blocks.at(bath_sum[c] + m);
                    const auto col = evolved.at(bath_sum[c] + m).col(q);
                    for (Eigen::Index j = 0; j < col.size(); ++j) {
                        const int n0 = b.system_level[static_cast<std::size_t>(j)];
                        if (n0 > Ns) continue;
                        phi(b.bath_index[static_cast<std::size_t>(j)], n0) += c0 * col(j);
                    }
                }
                // rho(n, n') = sum_bath psi(n, b) conj(psi(n', b))
                acc.noalias() += orbit.weight * (phi.transpose() * phi.conjugate());
            }
            partial[c] = configs[c].weight * acc;
        },
        threads);

    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(Ns + 1, Ns + 1);
    for (const auto& p : partial) rho += p;
    // The thermal mixture is truncated; renormalize by the retained configuration mass.
    rho /= configuration_weight();
    last_norm_error_ = norm_err.empty() ? 0.0 : *std::max_element(norm_err.begin(), norm_err.end());
    return FockDensityMatrix(rho);
}

FockDensityMatrix reduce_exact(const ManyBodyConfig& cfg, double t) { return ManyBodyOracle(cfg).reduce(t); }

Moments gaussian_moments(const ManyBodyConfig& cfg, double t) {
    const Moments m0 = moments(cfg.initial);
    const SinglePropagator p = propagate(assemble(cfg.bath), t);
    const cplx eta = p.eta();
    std::vector<double> n(cfg.bath.size(), 0.0);
    if (cfg.bath_state == BathState::Thermal) n = thermal_occupations(cfg.bath);
    double thermal = 0.0, sym = 0.0;
    for (std::size_t k = 0; k < n.size(); ++k) {
        const double g2 = std::norm(p.Z(0, static_cast<Eigen::Index>(k + 1)));
        thermal += g2 * n[k];
        sym += g2 * (2.0 * n[k] + 1.0);
    }
    Moments out;
    out.mean_a = eta * m0.mean_a;
    out.mean_n = std::norm(eta) * m0.mean_n + thermal;
    out.mean_a2 = eta * eta * m0.mean_a2;
    out.mean_anticomm = std::norm(eta) * m0.mean_anticomm + sym;
    return out;
}

ComparisonReport compare(const FockDensityMatrix& reduced, const FockDensityMatrix& candidate) {
    if (reduced.cutoff() != candidate.cutoff()) throw ValidationError("cutoff", "compared states differ in cutoff");
    const Moments a = moments(reduced), b = moments(candidate);
    ComparisonReport r;
    r.trace_distance = trace_distance(reduced, candidate);
    r.max_entry_deviation = (reduced.matrix() - candidate.matrix()).cwiseAbs().maxCoeff();
    r.mean_a_deviation = std::abs(a.mean_a - b.mean_a);
    r.mean_n_deviation = std::abs(a.mean_n - b.mean_n);
    r.mean_a2_deviation = std::abs(a.mean_a2 - b.mean_a2);
    r.mean_anticomm_deviation = std::abs(a.mean_anticomm - b.mean_anticomm);
    return r;
}

}  // namespace cavity
