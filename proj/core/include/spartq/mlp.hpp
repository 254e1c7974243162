#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spartq/io.hpp"

namespace spartq {

// Fully connected net, rectified-linear hidden layers, identity output.
// Columns of the input/output matrices are samples. Float in production;
// the double instantiation backs the finite-difference gradient check.
template <typename T>
struct BasicMlp {
    using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

    std::vector<int> dims;   // e.g. {in, 1200, 600, out}
    std::vector<Mat> weights;  // weights[l]: dims[l+1] x dims[l]
    std::vector<Vec> biases;

    BasicMlp() = default;

    // He-style uniform init scaled by fan-in, seeded.
    BasicMlp(std::vector<int> layer_dims, std::uint64_t seed) : dims(std::move(layer_dims)) {
        if (dims.size() < 2) throw std::invalid_argument("Mlp: need at least input and output");
        std::mt19937_64 rng(seed);
        for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
            const T bound = std::sqrt(T(6) / T(dims[l]));
            std::uniform_real_distribution<double> u(-double(bound), double(bound));
            Mat w(dims[l + 1], dims[l]);
            for (Eigen::Index c = 0; c < w.cols(); ++c)
                for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = T(u(rng));
            weights.push_back(std::move(w));
            biases.push_back(Vec::Zero(dims[l + 1]));
        }
    }

    int in_dim() const { return dims.front(); }
    int out_dim() const { return dims.back(); }
    std::size_t layer_count() const { return weights.size(); }

    Mat forward(const Mat& x) const {
        if (x.rows() != in_dim()) throw std::invalid_argument("Mlp::forward: input dim mismatch");
        Mat a = x;
        for (std::size_t l = 0; l < weights.size(); ++l) {
            Mat z = (weights[l] * a).colwise() + biases[l];
            if (l + 1 < weights.size()) z = z.cwiseMax(T(0));
            a = std::move(z);
        }
        return a;
    }
};

template <typename T>
struct BasicGradientSet {
    using Mat = typename BasicMlp<T>::Mat;
    using Vec = typename BasicMlp<T>::Vec;
    std::vector<Mat> d_weights;
    std::vector<Vec> d_biases;
};

// Gradients of the scalar loss whose per-output derivatives are given in
// `upstream` (out x batch), via one recomputed forward pass.
template <typename T>
BasicGradientSet<T> backward(const BasicMlp<T>& net, const typename BasicMlp<T>::Mat& x,
                             const typename BasicMlp<T>::Mat& upstream) {
    using Mat = typename BasicMlp<T>::Mat;
    if (x.rows() != net.in_dim()) throw std::invalid_argument("backward: input dim mismatch");
    if (upstream.rows() != net.out_dim() || upstream.cols() != x.cols())
        throw std::invalid_argument("backward: upstream shape mismatch");

    const std::size_t L = net.layer_count();
    std::vector<Mat> acts(L + 1);  // post-activation per layer, acts[0] = input
    acts[0] = x;
    for (std::size_t l = 0; l < L; ++l) {
        Mat z = (net.weights[l] * acts[l]).colwise() + net.biases[l];
        if (l + 1 < L) z = z.cwiseMax(T(0));
        acts[l + 1] = std::move(z);
    }

    BasicGradientSet<T> g;
    g.d_weights.resize(L);
    g.d_biases.resize(L);
    Mat delta = upstream;
    for (std::size_t l = L; l-- > 0;) {
        g.d_weights[l] = delta * acts[l].transpose();
        g.d_biases[l] = delta.rowwise().sum();
        if (l > 0) {
            delta = net.weights[l].transpose() * delta;
            // ReLU gate of the hidden activation.
            delta = delta.cwiseProduct(
                (acts[l].array() > T(0)).template cast<T>().matrix());
        }
    }
    return g;
}

template <typename T>
struct BasicAdamState {
    using Mat = typename BasicMlp<T>::Mat;
    using Vec = typename BasicMlp<T>::Vec;

    std::vector<Mat> m_w, v_w;
    std::vector<Vec> m_b, v_b;
    std::uint32_t step = 0;
    T eta = T(0.001);
    T beta1 = T(0.9);
    T beta2 = T(0.999);
    T eps = T(1e-8);

    explicit BasicAdamState(const BasicMlp<T>& net) {
        for (std::size_t l = 0; l < net.layer_count(); ++l) {
            m_w.push_back(Mat::Zero(net.weights[l].rows(), net.weights[l].cols()));
            v_w.push_back(Mat::Zero(net.weights[l].rows(), net.weights[l].cols()));
            m_b.push_back(Vec::Zero(net.biases[l].size()));
            v_b.push_back(Vec::Zero(net.biases[l].size()));
        }
    }
    BasicAdamState() = default;
};

template <typename T>
void adam_step(BasicMlp<T>& net, const BasicGradientSet<T>& grads, BasicAdamState<T>& opt) {
    if (grads.d_weights.size() != net.layer_count())
        throw std::invalid_argument("adam_step: gradient shape mismatch");
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        if (!grads.d_weights[l].allFinite() || !grads.d_biases[l].allFinite())
            throw std::runtime_error("adam_step: non-finite gradient, refusing to update");
    }
    opt.step += 1;
    const T bc1 = T(1) - std::pow(opt.beta1, T(opt.step));
    const T bc2 = T(1) - std::pow(opt.beta2, T(opt.step));
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        opt.m_w[l] = opt.beta1 * opt.m_w[l] + (T(1) - opt.beta1) * grads.d_weights[l];
        opt.v_w[l] = opt.beta2 * opt.v_w[l] +
                     (T(1) - opt.beta2) * grads.d_weights[l].cwiseProduct(grads.d_weights[l]);
        net.weights[l].array() -= opt.eta * (opt.m_w[l].array() / bc1) /
                                  ((opt.v_w[l].array() / bc2).sqrt() + opt.eps);
        opt.m_b[l] = opt.beta1 * opt.m_b[l] + (T(1) - opt.beta1) * grads.d_biases[l];
        opt.v_b[l] = opt.beta2 * opt.v_b[l] +
                     (T(1) - opt.beta2) * grads.d_biases[l].cwiseProduct(grads.d_biases[l]);
        net.biases[l].array() -= opt.eta * (opt.m_b[l].array() / bc1) /
                                 ((opt.v_b[l].array() / bc2).sqrt() + opt.eps);
    }
}

template <typename T>
void sync_target(const BasicMlp<T>& main, BasicMlp<T>& target) {
    if (main.dims != target.dims) throw std::invalid_argument("sync_target: dim mismatch");
    target.weights = main.weights;
    target.biases = main.biases;
}

using Mlp = BasicMlp<float>;
using GradientSet = BasicGradientSet<float>;
using AdamState = BasicAdamState<float>;

// Checkpoint: text header "SPARTQ v1 <in> <h1> <h2> <out>\n" followed by
// little-endian 32-bit floats, layer-major, weights (row-major) then bias;
// then Adam first moments, second moments in the same order, and the step
// counter as a little-endian uint32.
namespace detail {

inline void put_f32(std::string& out, float v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.append(buf, 4);
}
inline void put_mat(std::string& out, const Eigen::MatrixXf& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) put_f32(out, m(r, c));
}

struct Reader {
    const std::string& data;
    std::size_t pos;
    float f32() {
        if (pos + 4 > data.size()) throw std::runtime_error("checkpoint truncated");
        float v;
        std::memcpy(&v, data.data() + pos, 4);
        pos += 4;
        return v;
    }
    std::uint32_t u32() {
        if (pos + 4 > data.size()) throw std::runtime_error("checkpoint truncated");
        std::uint32_t v;
        std::memcpy(&v, data.data() + pos, 4);
        pos += 4;
        return v;
    }
    void mat(Eigen::MatrixXf& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = f32();
    }
};

}  // namespace detail

inline void save_checkpoint(const Mlp& net, const AdamState& opt, const std::string& path) {
    if (net.dims.size() != 4)
        throw std::invalid_argument("save_checkpoint: expects a 2-hidden-layer net");
    std::ostringstream header;
    header << "SPARTQ v1 " << net.dims[0] << ' ' << net.dims[1] << ' ' << net.dims[2] << ' '
           << net.dims[3] << '\n';
    std::string out = header.str();
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        detail::put_mat(out, net.weights[l]);
        detail::put_mat(out, net.biases[l]);
    }
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        detail::put_mat(out, opt.m_w[l]);
        detail::put_mat(out, opt.m_b[l]);
    }
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        detail::put_mat(out, opt.v_w[l]);
        detail::put_mat(out, opt.v_b[l]);
    }
    char step_le[4];
    std::uint32_t step = opt.step;
    std::memcpy(step_le, &step, 4);
    out.append(step_le, 4);
    write_file_atomic(path, out);
}

// Loads and validates a checkpoint. When `expected_dims` is given, a
// mismatch is an error naming both dimension lists.
inline std::pair<Mlp, AdamState> load_checkpoint(const std::string& path,
                                                 const std::vector<int>* expected_dims = nullptr) {
    const std::string data = read_file(path);
    auto nl = data.find('\n');
    if (nl == std::string::npos) throw std::runtime_error("checkpoint: missing header");
    std::istringstream header(data.substr(0, nl));
    std::string magic, version;
    std::vector<int> dims(4);
    header >> magic >> version >> dims[0] >> dims[1] >> dims[2] >> dims[3];
    if (!header || magic != "SPARTQ" || version != "v1")
        throw std::runtime_error("checkpoint: bad header in " + path);
    if (expected_dims && dims != *expected_dims) {
        auto fmt = [](const std::vector<int>& d) {
            std::string s;
            for (int x : d) s += std::to_string(x) + " ";
            return s;
        };
        throw std::runtime_error("checkpoint dims [" + fmt(dims) + "] do not match expected [" +
                                 fmt(*expected_dims) + "]");
    }

    Mlp net;
    net.dims = dims;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        net.weights.emplace_back(dims[l + 1], dims[l]);
        net.biases.push_back(Eigen::VectorXf::Zero(dims[l + 1]));
    }
    AdamState opt(net);

    detail::Reader rd{data, nl + 1};
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        rd.mat(net.weights[l]);
        Eigen::MatrixXf b(net.biases[l].size(), 1);
        rd.mat(b);
        net.biases[l] = b.col(0);
    }
    auto read_moments = [&](std::vector<Eigen::MatrixXf>& mw, std::vector<Eigen::VectorXf>& mb) {
        for (std::size_t l = 0; l < net.layer_count(); ++l) {
            rd.mat(mw[l]);
            Eigen::MatrixXf b(mb[l].size(), 1);
            rd.mat(b);
            mb[l] = b.col(0);
        }
    };
    read_moments(opt.m_w, opt.m_b);
    read_moments(opt.v_w, opt.v_b);
    opt.step = rd.u32();
    if (rd.pos != data.size()) throw std::runtime_error("checkpoint: trailing bytes in " + path);
    return {std::move(net), std::move(opt)};
}

}  // namespace spartq
