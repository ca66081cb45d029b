#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mgap/types.hpp"

namespace mgap {

// Dense MLP, tanh hidden activations, linear output. Batches are row-major
// (one sample per row). Backward pass is analytic; optimizer is AdamW.
class Mlp {
  public:
    struct Layer {
        MatX w;  // out x in
        VecX b;
    };

    Mlp() = default;
    // dims = {in, hidden..., out}. The output layer starts at zero so an
    // untrained model predicts the (de-normalized) zero vector.
    Mlp(const std::vector<int>& dims, std::mt19937_64& rng);

    MatX forward(const MatX& x) const;

    // Forward with caches, then backward from dloss/doutput.
    // Accumulates gradients internally; returns the output.
    MatX forward_cached(const MatX& x);
    void backward(const MatX& dout);

    void adamw_step(double lr, double beta1, double beta2, double eps, double weight_decay);
    void zero_grad();

    // Flat parameter access for finite-difference checks.
    VecX flat_params() const;
    void set_flat_params(const VecX& p);
    VecX flat_grads() const;

    int input_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().w.cols()); }
    int output_dim() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().w.rows()); }
    const std::vector<Layer>& layers() const { return layers_; }

    nlohmann::json to_json() const;
    static Mlp from_json(const nlohmann::json& j);

  private:
    std::vector<Layer> layers_;
    std::vector<Layer> grads_;
    std::vector<Layer> adam_m_, adam_v_;
    long adam_t_ = 0;
    std::vector<MatX> act_cache_;  // A_0..A_L
    std::vector<MatX> pre_cache_;  // Z_1..Z_L
};

}  // namespace mgap
