#include "slicerx/equalizer.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "slicerx/esn.hpp"
#include "slicerx/ffe.hpp"
#include "slicerx/fnn.hpp"

namespace slicerx {

namespace {

constexpr std::uint32_t kBlobVersion = 1;
enum Kind : std::uint32_t { kEsn = 1, kFfe = 2, kFnn = 3 };

template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("equalizer blob: truncated");
    return v;
}

void put_vector(std::ostream& os, const Eigen::VectorXd& v) {
    put<std::uint64_t>(os, static_cast<std::uint64_t>(v.size()));
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Eigen::VectorXd get_vector(std::istream& is) {
    const auto n = get<std::uint64_t>(is);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw std::runtime_error("equalizer blob: truncated vector");
    return v;
}

void put_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
    put<std::uint64_t>(os, static_cast<std::uint64_t>(m.rows()));
    put<std::uint64_t>(os, static_cast<std::uint64_t>(m.cols()));
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(m.size() * sizeof(double)));
}

Eigen::MatrixXd get_matrix(std::istream& is) {
    const auto r = get<std::uint64_t>(is);
    const auto c = get<std::uint64_t>(is);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!is) throw std::runtime_error("equalizer blob: truncated matrix");
    return m;
}

void write_header(std::ostream& os, std::uint32_t kind) {
    os.write("EQLZ", 4);
    put(os, kBlobVersion);
    put(os, kind);
}

}  // namespace

std::vector<std::vector<double>> standardize_channels(const DetectedChannels& rx) {
    if (rx.channels.empty()) throw std::invalid_argument("standardize: no channels");
    std::vector<std::vector<double>> out(rx.channels.size());
    for (std::size_t c = 0; c < rx.channels.size(); ++c) {
        const auto& ch = rx.channels[c];
        if (ch.empty()) throw std::invalid_argument("standardize: empty channel");
        double mean = 0.0;
        for (double v : ch) mean += v;
        mean /= static_cast<double>(ch.size());
        double var = 0.0;
        for (double v : ch) var += (v - mean) * (v - mean);
        var /= static_cast<double>(ch.size());
        const double inv_sd = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
        out[c].resize(ch.size());
        for (std::size_t i = 0; i < ch.size(); ++i) out[c][i] = (ch[i] - mean) * inv_sd;
    }
    return out;
}

void EsnEqualizer::save(std::ostream& os) const {
    if (!model_.trained()) throw std::logic_error("esn save: not trained");
    write_header(os, kEsn);
    put<std::uint64_t>(os, model_.n_inputs);
    put<std::uint64_t>(os, model_.params.n_neurons);
    put(os, model_.params.leak_rate);
    put(os, model_.params.sparsity);
    put(os, model_.params.input_scale);
    put<std::uint64_t>(os, model_.params.seed);
    put(os, model_.params.ridge_lambda);
    put(os, model_.params.spectral_radius);
    put<std::uint64_t>(os, model_.params.decision_delay_symbols);
    put<std::uint32_t>(os, model_.readout_phase);
    put_matrix(os, model_.w_in);
    put<std::uint64_t>(os, static_cast<std::uint64_t>(model_.w_res.nonZeros()));
    for (int k = 0; k < model_.w_res.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(model_.w_res, k); it;
             ++it) {
            put<std::uint32_t>(os, static_cast<std::uint32_t>(it.row()));
            put<std::uint32_t>(os, static_cast<std::uint32_t>(it.col()));
            put(os, it.value());
        }
    }
    put_vector(os, model_.w_out);
}

void FfeEqualizer::save(std::ostream& os) const {
    if (taps_.size() == 0) throw std::logic_error("ffe save: not trained");
    write_header(os, kFfe);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(params_.sps));
    put(os, params_.step_size);
    put_vector(os, taps_);
}

void FnnEqualizer::save(std::ostream& os) const {
    if (model_.w1.size() == 0) throw std::logic_error("fnn save: not trained");
    write_header(os, kFnn);
    put<std::uint32_t>(os, params_.window_symbols);
    put<std::uint32_t>(os, params_.sps);
    put_matrix(os, model_.w1);
    put_vector(os, model_.b1);
    put_vector(os, model_.w2);
    put(os, model_.b2);
}

std::unique_ptr<Equalizer> load_equalizer(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "EQLZ", 4) != 0)
        throw std::runtime_error("equalizer blob: bad magic");
    if (get<std::uint32_t>(is) != kBlobVersion)
        throw std::runtime_error("equalizer blob: unsupported version");
    const auto kind = get<std::uint32_t>(is);
    switch (kind) {
        case kEsn: {
            EsnModel m;
            m.n_inputs = get<std::uint64_t>(is);
            m.params.n_neurons = get<std::uint64_t>(is);
            m.params.leak_rate = get<double>(is);
            m.params.sparsity = get<double>(is);
            m.params.input_scale = get<double>(is);
            m.params.seed = get<std::uint64_t>(is);
            m.params.ridge_lambda = get<double>(is);
            m.params.spectral_radius = get<double>(is);
            m.params.decision_delay_symbols = get<std::uint64_t>(is);
            m.readout_phase = get<std::uint32_t>(is);
            m.w_in = get_matrix(is);
            const auto nnz = get<std::uint64_t>(is);
            std::vector<Eigen::Triplet<double>> trips;
            trips.reserve(nnz);
            for (std::uint64_t i = 0; i < nnz; ++i) {
                const auto r = get<std::uint32_t>(is);
                const auto c = get<std::uint32_t>(is);
                trips.emplace_back(r, c, get<double>(is));
            }
            const auto n = static_cast<Eigen::Index>(m.params.n_neurons);
            m.w_res.resize(n, n);
            m.w_res.setFromTriplets(trips.begin(), trips.end());
            m.w_out = get_vector(is);
            m.state = Eigen::VectorXd::Zero(n);
            return std::make_unique<EsnEqualizer>(std::move(m));
        }
        case kFfe: {
            FfeParams p;
            p.sps = get<std::uint32_t>(is);
            p.step_size = get<double>(is);
            Eigen::VectorXd taps = get_vector(is);
            p.n_taps = static_cast<std::size_t>(taps.size());
            return std::make_unique<FfeEqualizer>(p, std::move(taps));
        }
        case kFnn: {
            FnnParams p;
            p.window_symbols = get<std::uint32_t>(is);
            p.sps = get<std::uint32_t>(is);
            FnnModel m;
            m.w1 = get_matrix(is);
            m.b1 = get_vector(is);
            m.w2 = get_vector(is);
            m.b2 = get<double>(is);
            p.hidden_neurons = static_cast<std::size_t>(m.w1.rows());
            return std::make_unique<FnnEqualizer>(p, std::move(m));
        }
        default:
            throw std::runtime_error("equalizer blob: unknown kind tag");
    }
}

}  // namespace slicerx
