#include "slicerx/esn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

#include "slicerx/rng.hpp"

namespace slicerx {

namespace {

constexpr int kMaxInitAttempts = 10;
constexpr std::size_t kProbeSteps = 1000;
constexpr double kProbeContraction = 1e-3;

void step_into(const EsnModel& m, const Eigen::VectorXd& u, const Eigen::VectorXd& x_prev,
               Eigen::VectorXd& pre, Eigen::VectorXd& x_next) {
    pre.noalias() = m.w_in * u;
    pre.noalias() += m.w_res * x_prev;
    const double leak = m.params.leak_rate;
    x_next.array() = leak * pre.array().tanh() + (1.0 - leak) * x_prev.array();
}

/// Two probe trajectories from different initial states must coalesce; this is
/// the usable-reservoir check applied to every weight draw.
bool forgets_initial_state(const EsnModel& m, std::uint64_t probe_seed) {
    const auto n = static_cast<Eigen::Index>(m.params.n_neurons);
    Rng rng(probe_seed);
    Eigen::VectorXd xa = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd xb(n);
    for (Eigen::Index i = 0; i < n; ++i) xb[i] = rng.uniform(-1.0, 1.0);
    const double d0 = (xa - xb).norm();
    Eigen::VectorXd u(m.n_inputs + 1);
    Eigen::VectorXd pre(n), next(n);
    for (std::size_t t = 0; t < kProbeSteps; ++t) {
        u[0] = 1.0;
        for (std::size_t k = 0; k < m.n_inputs; ++k) u[static_cast<Eigen::Index>(k) + 1] = rng.normal();
        step_into(m, u, xa, pre, next);
        xa.swap(next);
        step_into(m, u, xb, pre, next);
        xb.swap(next);
    }
    return (xa - xb).norm() < kProbeContraction * d0;
}

/// Growth-rate power iteration; handles complex dominant pairs by averaging
/// log-growth over the settled tail.
double estimate_spectral_radius(const Eigen::SparseMatrix<double, Eigen::RowMajor>& w,
                                std::uint64_t seed) {
    const Eigen::Index n = w.rows();
    Rng rng(seed);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
    v.normalize();
    const int warmup = 100, measure = 200;
    double acc = 0.0;
    for (int it = 0; it < warmup + measure; ++it) {
        Eigen::VectorXd next = w * v;
        const double g = next.norm();
        if (g == 0.0) return 0.0;
        if (it >= warmup) acc += std::log(g);
        v = next / g;
    }
    return std::exp(acc / measure);
}

EsnModel draw_model(const EsnParams& p, std::size_t n_inputs, std::uint64_t draw_seed) {
    EsnModel m;
    m.params = p;
    m.n_inputs = n_inputs;
    const auto n = static_cast<Eigen::Index>(p.n_neurons);
    Rng rng(draw_seed);

    m.w_in.resize(n, static_cast<Eigen::Index>(n_inputs) + 1);
    for (Eigen::Index r = 0; r < m.w_in.rows(); ++r)
        for (Eigen::Index c = 0; c < m.w_in.cols(); ++c)
            m.w_in(r, c) = rng.uniform(-1.0, 1.0) * p.input_scale;

    const std::size_t total = p.n_neurons * p.n_neurons;
    // ceil((1 - sparsity) * N^2), snapping away binary dust so 2% of 500^2
    // really is 5000
    double frac = (1.0 - p.sparsity) * static_cast<double>(total);
    if (std::abs(frac - std::round(frac)) < 1e-6 * std::max(1.0, frac)) frac = std::round(frac);
    const auto nnz = static_cast<std::size_t>(std::ceil(frac));
    std::set<std::size_t> cells;
    while (cells.size() < nnz) cells.insert(rng.index(total));
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(nnz);
    for (std::size_t cell : cells) {
        const auto r = static_cast<Eigen::Index>(cell / p.n_neurons);
        const auto c = static_cast<Eigen::Index>(cell % p.n_neurons);
        trips.emplace_back(r, c, rng.normal());
    }
    m.w_res.resize(n, n);
    m.w_res.setFromTriplets(trips.begin(), trips.end());
    if (p.spectral_radius > 0.0 && nnz > 0) {
        const double rho = estimate_spectral_radius(m.w_res, splitmix64(draw_seed));
        if (rho > 0.0) m.w_res *= p.spectral_radius / rho;
    }
    m.state = Eigen::VectorXd::Zero(n);
    return m;
}

/// Runs the reservoir over the record and hands every post-update sample to
/// sink(sample_index, u).
template <typename Sink>
void run_reservoir(EsnModel& m, const std::vector<std::vector<double>>& channels, Sink&& sink) {
    const std::size_t k = channels.size();
    if (k != m.n_inputs) throw std::invalid_argument("esn: channel count mismatch");
    const std::size_t len = channels.front().size();
    const auto n = static_cast<Eigen::Index>(m.params.n_neurons);
    Eigen::VectorXd u(static_cast<Eigen::Index>(k) + 1);
    Eigen::VectorXd pre(n), next(n);
    m.reset_state();
    u[0] = 1.0;
    for (std::size_t t = 0; t < len; ++t) {
        for (std::size_t c = 0; c < k; ++c) u[static_cast<Eigen::Index>(c) + 1] = channels[c][t];
        step_into(m, u, m.state, pre, next);
        m.state.swap(next);
        sink(t, u);
    }
}

}  // namespace

EsnModel esn_init(const EsnParams& p, std::size_t n_inputs) {
    if (n_inputs < 1) throw std::invalid_argument("esn_init: need at least one input");
    if (p.n_neurons < 1) throw std::invalid_argument("esn_init: need at least one neuron");
    if (p.leak_rate <= 0.0 || p.leak_rate > 1.0)
        throw std::invalid_argument("esn_init: leak rate must be in (0, 1]");
    if (p.sparsity < 0.0 || p.sparsity >= 1.0)
        throw std::invalid_argument("esn_init: sparsity must be in [0, 1)");

    std::uint64_t draw_seed = derive_seed(p.seed, SeedTag::Reservoir);
    const std::uint64_t probe_seed = derive_seed(p.seed, SeedTag::Probe);
    for (int attempt = 0; attempt < kMaxInitAttempts; ++attempt) {
        EsnModel m = draw_model(p, n_inputs, draw_seed);
        if (forgets_initial_state(m, probe_seed)) return m;
        draw_seed = splitmix64(draw_seed);
    }
    throw std::runtime_error("esn_init: no usable reservoir draw in 10 attempts");
}

void esn_step(EsnModel& m, const Eigen::VectorXd& u_with_bias) {
    if (u_with_bias.size() != static_cast<Eigen::Index>(m.n_inputs) + 1)
        throw std::invalid_argument("esn_step: input dimension mismatch");
    Eigen::VectorXd pre(m.state.size()), next(m.state.size());
    step_into(m, u_with_bias, m.state, pre, next);
    m.state.swap(next);
}

TrainReport esn_train_readout(EsnModel& m, const std::vector<std::vector<double>>& channels,
                              std::span<const double> targets, unsigned sps) {
    const std::size_t k = channels.size();
    const std::size_t delay = m.params.decision_delay_symbols;
    const std::size_t skip = washout_symbols(sps) + delay;
    const std::size_t n_train = targets.size();
    const std::size_t rows_avail = n_train > skip ? n_train - skip : 0;
    const std::size_t cols = 1 + k + m.params.n_neurons;
    if (rows_avail < cols)
        throw std::invalid_argument("esn_train_readout: fewer training rows than readout weights");

    TrainReport rep;
    rep.n_train_samples = rows_avail;
    rep.iterations = 1;
    const auto nc = static_cast<Eigen::Index>(cols);

    if (m.params.ridge_lambda > 0.0) {
        // Alignment wobbles by a few samples from record to record, and the
        // single-sample readout is sensitive to where inside the symbol it
        // strikes. Fit one ridge readout per within-symbol phase on streamed
        // normal equations and keep the phase with the lowest training error.
        std::vector<Eigen::MatrixXd> gram(sps, Eigen::MatrixXd::Zero(nc, nc));
        std::vector<Eigen::VectorXd> xty(sps, Eigen::VectorXd::Zero(nc));
        std::vector<double> yty(sps, 0.0);
        Eigen::VectorXd row(nc);
        run_reservoir(m, channels, [&](std::size_t t, const Eigen::VectorXd& u) {
            const std::size_t sym = t / sps;
            if (sym < skip || sym >= n_train) return;
            const unsigned phase = static_cast<unsigned>(t % sps);
            row[0] = 1.0;
            row.segment(1, static_cast<Eigen::Index>(k)) = u.tail(static_cast<Eigen::Index>(k));
            row.tail(m.state.size()) = m.state;
            const double target = targets[sym - delay];
            gram[phase].selfadjointView<Eigen::Lower>().rankUpdate(row);
            xty[phase] += target * row;
            yty[phase] += target * target;
        });
        double best_mse = std::numeric_limits<double>::infinity();
        for (unsigned phase = 0; phase < sps; ++phase) {
            Eigen::MatrixXd damped(gram[phase].selfadjointView<Eigen::Lower>());
            damped.diagonal().array() += m.params.ridge_lambda;
            const Eigen::VectorXd w = damped.ldlt().solve(xty[phase]);
            const double sse =
                yty[phase] - 2.0 * w.dot(xty[phase]) +
                w.dot(gram[phase].selfadjointView<Eigen::Lower>() * w);
            const double mse = std::max(0.0, sse) / static_cast<double>(rows_avail);
            if (mse < best_mse) {
                best_mse = mse;
                m.w_out = w;
                m.readout_phase = phase;
            }
        }
        rep.train_mse = best_mse;
        return rep;
    }

    // plain least squares: literal symbol-center rows, minimum-norm on rank
    // deficiency
    Eigen::MatrixXd design(static_cast<Eigen::Index>(rows_avail), nc);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows_avail));
    run_reservoir(m, channels, [&](std::size_t t, const Eigen::VectorXd& u) {
        if (t % sps != 0) return;
        const std::size_t sym = t / sps;
        if (sym < skip || sym >= n_train) return;
        const auto r = static_cast<Eigen::Index>(sym - skip);
        design(r, 0) = 1.0;
        design.row(r).segment(1, static_cast<Eigen::Index>(k)) = u.tail(static_cast<Eigen::Index>(k));
        design.row(r).tail(m.state.size()) = m.state;
        y[r] = targets[sym - delay];
    });
    m.readout_phase = 0;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
    m.w_out = cod.solve(y);  // minimum-norm least squares
    rep.used_min_norm = cod.rank() < nc;
    rep.train_mse = (design * m.w_out - y).squaredNorm() / static_cast<double>(rows_avail);
    return rep;
}

std::vector<double> esn_equalize(EsnModel& m, const std::vector<std::vector<double>>& channels,
                                 unsigned sps) {
    if (!m.trained()) throw std::logic_error("esn_equalize: readout not trained");
    const std::size_t k = channels.size();
    const std::size_t delay = m.params.decision_delay_symbols;
    const std::size_t n_symbols = channels.front().size() / sps;
    // the last `delay` symbols never see their readout instant; drop them
    std::vector<double> soft(n_symbols > delay ? n_symbols - delay : 0, 0.0);
    const auto kk = static_cast<Eigen::Index>(k);
    run_reservoir(m, channels, [&](std::size_t t, const Eigen::VectorXd& u) {
        if (t % sps != m.readout_phase) return;
        const std::size_t sym = t / sps;
        if (sym < delay || sym - delay >= soft.size()) return;
        double y = m.w_out[0];
        y += m.w_out.segment(1, kk).dot(u.tail(kk));
        y += m.w_out.tail(m.state.size()).dot(m.state);
        soft[sym - delay] = y;
    });
    return soft;
}

TrainReport EsnEqualizer::train(const DetectedChannels& rx, std::span<const double> train_amplitudes,
                                unsigned sps) {
    const auto channels = standardize_channels(rx);
    if (!model_.trained() && model_.n_inputs != channels.size())
        model_ = esn_init(params_, channels.size());
    std::vector<double> targets(train_amplitudes.size());
    for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = 2.0 * train_amplitudes[i] - 1.0;
    return esn_train_readout(model_, channels, targets, sps);
}

SoftSymbols EsnEqualizer::equalize(const DetectedChannels& rx, unsigned sps) const {
    const auto channels = standardize_channels(rx);
    return SoftSymbols{esn_equalize(model_, channels, sps), 0};
}

}  // namespace slicerx
