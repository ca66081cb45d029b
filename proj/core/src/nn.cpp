#include "mgap/nn.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "mgap/errors.hpp"

namespace mgap {

using json = nlohmann::json;

Mlp::Mlp(const std::vector<int>& dims, std::mt19937_64& rng) {
    if (dims.size() < 2) throw ContractError("Mlp: need at least input and output dims");
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer layer;
        layer.w = MatX::Zero(dims[l + 1], dims[l]);
        layer.b = VecX::Zero(dims[l + 1]);
        bool last = l + 2 == dims.size();
        if (!last) {
            // Xavier-uniform for tanh layers
            double bound = std::sqrt(6.0 / (dims[l] + dims[l + 1]));
            std::uniform_real_distribution<double> u(-bound, bound);
            for (Eigen::Index i = 0; i < layer.w.size(); ++i) layer.w.data()[i] = u(rng);
        }
        layers_.push_back(std::move(layer));
    }
    grads_.resize(layers_.size());
    adam_m_.resize(layers_.size());
    adam_v_.resize(layers_.size());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        grads_[l].w = MatX::Zero(layers_[l].w.rows(), layers_[l].w.cols());
        grads_[l].b = VecX::Zero(layers_[l].b.size());
        adam_m_[l] = grads_[l];
        adam_v_[l] = grads_[l];
    }
}

MatX Mlp::forward(const MatX& x) const {
    MatX a = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        MatX z = (a * layers_[l].w.transpose()).rowwise() + layers_[l].b.transpose();
        if (l + 1 < layers_.size())
            a = z.array().tanh().matrix();
        else
            a = std::move(z);
    }
    return a;
}

MatX Mlp::forward_cached(const MatX& x) {
    act_cache_.clear();
    pre_cache_.clear();
    act_cache_.push_back(x);
    MatX a = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        MatX z = (a * layers_[l].w.transpose()).rowwise() + layers_[l].b.transpose();
        pre_cache_.push_back(z);
        if (l + 1 < layers_.size())
            a = z.array().tanh().matrix();
        else
            a = z;
        act_cache_.push_back(a);
    }
    return a;
}

void Mlp::backward(const MatX& dout) {
    if (act_cache_.empty()) throw ContractError("Mlp::backward without forward_cached");
    MatX g = dout;
    for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
        MatX dz;
        if (l + 1 < static_cast<int>(layers_.size())) {
            // tanh'(z) = 1 - tanh(z)^2; act_cache_[l+1] holds tanh(z)
            dz = g.array() * (1.0 - act_cache_[l + 1].array().square());
        } else {
            dz = g;
        }
        grads_[l].w += dz.transpose() * act_cache_[l];
        grads_[l].b += dz.colwise().sum().transpose();
        if (l > 0) g = dz * layers_[l].w;
    }
}

void Mlp::zero_grad() {
    for (auto& gl : grads_) {
        gl.w.setZero();
        gl.b.setZero();
    }
}

void Mlp::adamw_step(double lr, double beta1, double beta2, double eps, double weight_decay) {
    adam_t_++;
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t_));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t_));
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        auto upd = [&](MatX& p, const MatX& g, MatX& m, MatX& v) {
            m = beta1 * m + (1.0 - beta1) * g;
            v = beta2 * v + (1.0 - beta2) * g.array().square().matrix();
            MatX mhat = m / bc1;
            MatX vhat = v / bc2;
            p -= lr * (mhat.array() / (vhat.array().sqrt() + eps)).matrix();
            p -= lr * weight_decay * p;
        };
        upd(layers_[l].w, grads_[l].w, adam_m_[l].w, adam_v_[l].w);
        MatX b = layers_[l].b, gb = grads_[l].b, mb = adam_m_[l].b, vb = adam_v_[l].b;
        upd(b, gb, mb, vb);
        layers_[l].b = b;
        adam_m_[l].b = mb;
        adam_v_[l].b = vb;
    }
}

VecX Mlp::flat_params() const {
    long n = 0;
    for (const auto& l : layers_) n += l.w.size() + l.b.size();
    VecX p(n);
    long at = 0;
    for (const auto& l : layers_) {
        p.segment(at, l.w.size()) = Eigen::Map<const VecX>(l.w.data(), l.w.size());
        at += l.w.size();
        p.segment(at, l.b.size()) = l.b;
        at += l.b.size();
    }
    return p;
}

void Mlp::set_flat_params(const VecX& p) {
    long at = 0;
    for (auto& l : layers_) {
        Eigen::Map<VecX>(l.w.data(), l.w.size()) = p.segment(at, l.w.size());
        at += l.w.size();
        l.b = p.segment(at, l.b.size());
        at += l.b.size();
    }
    if (at != p.size()) throw ContractError("Mlp::set_flat_params: size mismatch");
}

VecX Mlp::flat_grads() const {
    long n = 0;
    for (const auto& l : grads_) n += l.w.size() + l.b.size();
    VecX p(n);
    long at = 0;
    for (const auto& l : grads_) {
        p.segment(at, l.w.size()) = Eigen::Map<const VecX>(l.w.data(), l.w.size());
        at += l.w.size();
        p.segment(at, l.b.size()) = l.b;
        at += l.b.size();
    }
    return p;
}

json Mlp::to_json() const {
    json j = json::array();
    for (const auto& l : layers_) {
        json jl;
        jl["rows"] = l.w.rows();
        jl["cols"] = l.w.cols();
        jl["w"] = std::vector<double>(l.w.data(), l.w.data() + l.w.size());
        jl["b"] = std::vector<double>(l.b.data(), l.b.data() + l.b.size());
        j.push_back(std::move(jl));
    }
    return j;
}

Mlp Mlp::from_json(const json& j) {
    Mlp net;
    for (const json& jl : j) {
        Layer l;
        long rows = jl.at("rows").get<long>();
        long cols = jl.at("cols").get<long>();
        auto w = jl.at("w").get<std::vector<double>>();
        auto b = jl.at("b").get<std::vector<double>>();
        if (static_cast<long>(w.size()) != rows * cols || static_cast<long>(b.size()) != rows)
            throw ParseError("Mlp::from_json: shape mismatch");
        l.w = Eigen::Map<const MatX>(w.data(), rows, cols);
        l.b = Eigen::Map<const VecX>(b.data(), rows);
        net.layers_.push_back(std::move(l));
    }
    net.grads_.resize(net.layers_.size());
    net.adam_m_.resize(net.layers_.size());
    net.adam_v_.resize(net.layers_.size());
    for (std::size_t l = 0; l < net.layers_.size(); ++l) {
        net.grads_[l].w = MatX::Zero(net.layers_[l].w.rows(), net.layers_[l].w.cols());
        net.grads_[l].b = VecX::Zero(net.layers_[l].b.size());
        net.adam_m_[l] = net.grads_[l];
        net.adam_v_[l] = net.grads_[l];
    }
    return net;
}

}  // namespace mgap
