#include "slicerx/fnn.hpp"

#include <cmath>
#include <stdexcept>

#include "slicerx/rng.hpp"

namespace slicerx {

namespace {

constexpr double kDampingInit = 1e-3;
constexpr double kDampingMax = 1e12;

Eigen::VectorXd pack(const FnnModel& m) {
    Eigen::VectorXd theta(static_cast<Eigen::Index>(m.n_params()));
    Eigen::Index o = 0;
    theta.segment(o, m.w1.size()) = Eigen::Map<const Eigen::VectorXd>(m.w1.data(), m.w1.size());
    o += m.w1.size();
    theta.segment(o, m.b1.size()) = m.b1;
    o += m.b1.size();
    theta.segment(o, m.w2.size()) = m.w2;
    o += m.w2.size();
    theta[o] = m.b2;
    return theta;
}

void unpack(const Eigen::VectorXd& theta, FnnModel& m) {
    Eigen::Index o = 0;
    Eigen::Map<Eigen::VectorXd>(m.w1.data(), m.w1.size()) = theta.segment(o, m.w1.size());
    o += m.w1.size();
    m.b1 = theta.segment(o, m.b1.size());
    o += m.b1.size();
    m.w2 = theta.segment(o, m.w2.size());
    o += m.w2.size();
    m.b2 = theta[o];
}

/// Hidden activations (rows) and residuals y_hat - y.
void forward(const FnnModel& m, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
             Eigen::MatrixXd& hidden, Eigen::VectorXd& residual) {
    hidden = ((x * m.w1.transpose()).rowwise() + m.b1.transpose()).array().tanh();
    residual = hidden * m.w2;
    residual.array() += m.b2;
    residual -= y;
}

/// Jacobian of the residuals w.r.t. packed parameters.
void jacobian(const FnnModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& hidden,
              Eigen::MatrixXd& jac) {
    const Eigen::Index n = x.rows();
    const Eigen::Index f = x.cols();
    const Eigen::Index h = m.w1.rows();
    jac.resize(n, static_cast<Eigen::Index>(m.n_params()));
    // d residual / d w1(j, k) = w2_j * (1 - h_j^2) * x_k ; column-major w1 layout
    Eigen::MatrixXd gate = (1.0 - hidden.array().square()).matrix();  // n x h
    for (Eigen::Index j = 0; j < h; ++j) gate.col(j) *= m.w2[j];
    for (Eigen::Index k = 0; k < f; ++k)
        jac.middleCols(k * h, h) = gate.array().colwise() * x.col(k).array();
    jac.middleCols(f * h, h) = gate;             // b1
    jac.middleCols(f * h + h, h) = hidden;       // w2
    jac.col(f * h + 2 * h).setOnes();            // b2
}

}  // namespace

FeatureMatrix fnn_window_features(const std::vector<std::vector<double>>& channels, unsigned sps,
                                  unsigned window_symbols) {
    if (channels.empty()) throw std::invalid_argument("fnn_window_features: no channels");
    const std::size_t len = channels.front().size();
    const std::size_t n_symbols = len / sps;
    const std::size_t w_samp = static_cast<std::size_t>(window_symbols) * sps;
    const std::size_t half_before = w_samp / 2;  // window starts at center - half_before
    const std::size_t lead = (half_before + sps - 1) / sps;
    const std::size_t tail = (w_samp - half_before + sps - 1) / sps;
    if (n_symbols <= lead + tail)
        throw std::invalid_argument("fnn_window_features: record shorter than one window");

    FeatureMatrix fm;
    fm.first_symbol = lead;
    const std::size_t n_rows = n_symbols - lead - tail;
    fm.rows.resize(static_cast<Eigen::Index>(n_rows),
                   static_cast<Eigen::Index>(channels.size() * w_samp));
    for (std::size_t r = 0; r < n_rows; ++r) {
        const std::size_t center = (r + lead) * sps;
        const std::size_t start = center - half_before;
        Eigen::Index col = 0;
        for (const auto& ch : channels)
            for (std::size_t s = 0; s < w_samp; ++s) fm.rows(static_cast<Eigen::Index>(r), col++) = ch[start + s];
    }
    return fm;
}

TrainReport fnn_train(FnnModel& m, const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                      const FnnParams& p) {
    const Eigen::Index n = features.rows();
    const Eigen::Index f = features.cols();
    if (n == 0 || n != targets.size()) throw std::invalid_argument("fnn_train: bad training set");
    const auto h = static_cast<Eigen::Index>(p.hidden_neurons);

    if (m.w1.rows() != h || m.w1.cols() != f) {
        Rng rng(derive_seed(p.seed, SeedTag::NetInit));
        const double a1 = 1.0 / std::sqrt(static_cast<double>(f));
        const double a2 = 1.0 / std::sqrt(static_cast<double>(h));
        m.w1.resize(h, f);
        for (Eigen::Index c = 0; c < f; ++c)
            for (Eigen::Index r = 0; r < h; ++r) m.w1(r, c) = rng.uniform(-a1, a1);
        m.b1 = Eigen::VectorXd::Zero(h);
        m.w2.resize(h);
        for (Eigen::Index r = 0; r < h; ++r) m.w2[r] = rng.uniform(-a2, a2);
        m.b2 = 0.0;
    }

    const auto n_params = static_cast<Eigen::Index>(m.n_params());
    Eigen::MatrixXd hidden, jac;
    Eigen::VectorXd residual;
    forward(m, features, targets, hidden, residual);
    double sse = residual.squaredNorm();

    TrainReport rep;
    rep.n_train_samples = static_cast<std::size_t>(n);
    double damping = kDampingInit;
    bool fresh_jacobian = true;
    Eigen::MatrixXd normal;   // J^T J (or J J^T in the dual)
    Eigen::VectorXd gradient; // J^T r
    // Residual-space solve keeps the step inside J's row space, which avoids
    // the 1/damping noise blow-up of near-singular J^T J (redundant hidden
    // units make J rank-deficient). Prefer it unless rows dominate params.
    const bool dual = static_cast<double>(n) <= 2.0 * static_cast<double>(n_params);

    std::size_t epoch = 0;
    for (; epoch < p.max_epochs; ++epoch) {
        if (fresh_jacobian) {
            jacobian(m, features, hidden, jac);
            if (dual) {
                normal.resize(n, n);
                normal.setZero();
                normal.selfadjointView<Eigen::Lower>().rankUpdate(jac);
            } else {
                normal.resize(n_params, n_params);
                normal.setZero();
                normal.selfadjointView<Eigen::Lower>().rankUpdate(jac.transpose());
                gradient = jac.transpose() * residual;
            }
            fresh_jacobian = false;
        }

        bool accepted = false;
        Eigen::VectorXd theta = pack(m);
        while (damping <= kDampingMax) {
            Eigen::MatrixXd damped(normal.selfadjointView<Eigen::Lower>());
            damped.diagonal().array() += damping;
            Eigen::LLT<Eigen::MatrixXd> llt(damped);
            if (llt.info() != Eigen::Success) {
                damping *= 10.0;
                continue;
            }
            Eigen::VectorXd step;
            if (dual)
                step = -jac.transpose() * llt.solve(residual);
            else
                step = -llt.solve(gradient);

            FnnModel trial = m;
            unpack(theta + step, trial);
            Eigen::MatrixXd trial_hidden;
            Eigen::VectorXd trial_residual;
            forward(trial, features, targets, trial_hidden, trial_residual);
            const double trial_sse = trial_residual.squaredNorm();
            if (std::isfinite(trial_sse) && trial_sse < sse) {
                m = std::move(trial);
                hidden = std::move(trial_hidden);
                residual = std::move(trial_residual);
                const double improvement = (sse - trial_sse) / static_cast<double>(n);
                sse = trial_sse;
                damping = std::max(damping * 0.1, 1e-15);
                fresh_jacobian = true;
                accepted = true;
                if (improvement < p.mse_improve_tol) {
                    rep.converged = true;
                    rep.iterations = epoch + 1;
                    rep.train_mse = sse / static_cast<double>(n);
                    return rep;
                }
                break;
            }
            damping *= 10.0;
        }
        if (!accepted) {
            if (damping > kDampingMax)
                throw TrainingError("fnn_train: normal system singular at maximum damping");
            break;
        }
    }
    rep.converged = epoch < p.max_epochs;
    rep.iterations = epoch;
    rep.train_mse = sse / static_cast<double>(n);
    return rep;
}

Eigen::VectorXd fnn_infer(const FnnModel& m, const Eigen::MatrixXd& features) {
    Eigen::VectorXd y =
        ((features * m.w1.transpose()).rowwise() + m.b1.transpose()).array().tanh().matrix() * m.w2;
    y.array() += m.b2;
    return y;
}

TrainReport FnnEqualizer::train(const DetectedChannels& rx, std::span<const double> train_amplitudes,
                                unsigned sps) {
    const auto channels = standardize_channels(rx);
    auto fm = fnn_window_features(channels, sps, params_.window_symbols);
    const std::size_t skip = std::max(washout_symbols(sps), fm.first_symbol);
    if (train_amplitudes.size() <= skip)
        throw std::invalid_argument("fnn: training prefix shorter than the washout");
    const std::size_t n_rows = train_amplitudes.size() - skip;
    Eigen::MatrixXd x = fm.rows.middleRows(static_cast<Eigen::Index>(skip - fm.first_symbol),
                                           static_cast<Eigen::Index>(n_rows));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n_rows));
    for (std::size_t i = 0; i < n_rows; ++i)
        y[static_cast<Eigen::Index>(i)] = 2.0 * train_amplitudes[skip + i] - 1.0;
    return fnn_train(model_, x, y, params_);
}

SoftSymbols FnnEqualizer::equalize(const DetectedChannels& rx, unsigned sps) const {
    if (model_.w1.size() == 0) throw std::logic_error("fnn: not trained");
    const auto channels = standardize_channels(rx);
    auto fm = fnn_window_features(channels, sps, params_.window_symbols);
    auto y = fnn_infer(model_, fm.rows);
    SoftSymbols out;
    out.first_symbol = fm.first_symbol;
    out.values.assign(y.data(), y.data() + y.size());
    return out;
}

}  // namespace slicerx
