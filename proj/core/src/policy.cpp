#include "mgap/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>

#include "mgap/errors.hpp"
#include "mgap/seeding.hpp"

namespace mgap {

using json = nlohmann::json;

namespace {
constexpr int kSchemaVersion = 1;
constexpr double kStdFloor = 1e-8;
}  // namespace

int PolicyConfig::obs_dim() const {
    const int dim = kDim + 1;
    int n = t_obs * dim;
    if (mode == PolicyMode::kSM2M) n += t_obs * dim;
    n += visual_dim;
    if (use_inpainting) n += horizon * (2 * dim) + horizon;
    return n;
}

void PolicyConfig::validate() const {
    if (t_exec > horizon) throw ConfigError("policy: T_exec must be <= H");
    if (k_max >= horizon) throw ConfigError("policy: K_max must be < H");
    if (k_max < 0) throw ConfigError("policy: K_max must be >= 0");
    if (t_obs < 1) throw ConfigError("policy: T_obs must be >= 1");
    if (horizon < 1) throw ConfigError("policy: H must be >= 1");
    if (hidden.empty()) throw ConfigError("policy: need at least one hidden layer");
    if (batch < 1) throw ConfigError("policy: batch must be >= 1");
    if (visual_dim < 0) throw ConfigError("policy: bad visual_dim");
}

VecX build_observation(PolicyMode mode, const MatX& slave_hist, const MatX& master_hist,
                       const VecX& visual, const MatX& committed_prefix,
                       const std::vector<std::uint8_t>& mask, bool use_inpainting) {
    const int dim = kDim + 1;
    if (slave_hist.cols() != dim) throw ContractError("build_observation: slave_hist shape");
    if (mode == PolicyMode::kSM2M) {
        if (master_hist.rows() != slave_hist.rows() || master_hist.cols() != dim)
            throw ContractError("build_observation: master_hist shape");
    }
    int h = static_cast<int>(committed_prefix.rows());
    if (use_inpainting) {
        if (committed_prefix.cols() != dim) throw ContractError("build_observation: prefix shape");
        if (static_cast<int>(mask.size()) != h) throw ContractError("build_observation: mask length");
    }

    int n = static_cast<int>(slave_hist.size()) +
            (mode == PolicyMode::kSM2M ? static_cast<int>(master_hist.size()) : 0) +
            static_cast<int>(visual.size()) + (use_inpainting ? h * 2 * dim + h : 0);
    VecX obs(n);
    int at = 0;
    for (int i = 0; i < slave_hist.rows(); ++i) {
        obs.segment(at, dim) = slave_hist.row(i).transpose();
        at += dim;
    }
    if (mode == PolicyMode::kSM2M) {
        for (int i = 0; i < master_hist.rows(); ++i) {
            obs.segment(at, dim) = master_hist.row(i).transpose();
            at += dim;
        }
    }
    obs.segment(at, visual.size()) = visual;
    at += static_cast<int>(visual.size());
    if (use_inpainting) {
        VecX slave_now = slave_hist.row(slave_hist.rows() - 1).transpose();
        for (int i = 0; i < h; ++i) {
            obs.segment(at, dim) = committed_prefix.row(i).transpose();
            at += dim;
            obs.segment(at, dim) = slave_now;  // future-token pairing
            at += dim;
        }
        for (int i = 0; i < h; ++i) obs[at++] = mask[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    }
    return obs;
}

double chunk_loss(const MatX& pred, const MatX& target, const std::vector<std::uint8_t>& mask) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw ContractError("chunk_loss: shape mismatch");
    if (static_cast<int>(mask.size()) != pred.rows())
        throw ContractError("chunk_loss: mask length mismatch");
    double sum = 0.0;
    int n = 0;
    for (int i = 0; i < pred.rows(); ++i) {
        if (mask[static_cast<std::size_t>(i)]) continue;
        sum += (pred.row(i) - target.row(i)).squaredNorm();
        n++;
    }
    if (n == 0) return 0.0;
    return sum / (static_cast<double>(n) * static_cast<double>(pred.cols()));
}

PolicyModel init_policy(const PolicyConfig& cfg) {
    cfg.validate();
    PolicyModel model;
    model.config = cfg;
    std::mt19937_64 rng = make_rng(cfg.seed, "policy_init");
    std::vector<int> dims;
    int in = cfg.obs_dim();
    if (cfg.head == HeadKind::kRefinement) in += cfg.chunk_dim() + 1;  // + noisy chunk + time
    dims.push_back(in);
    for (int hdim : cfg.hidden) dims.push_back(hdim);
    dims.push_back(cfg.chunk_dim());
    model.net = Mlp(dims, rng);
    model.norm.obs_mean = VecX::Zero(cfg.obs_dim());
    model.norm.obs_std = VecX::Ones(cfg.obs_dim());
    model.norm.tgt_mean = VecX::Zero(cfg.chunk_dim());
    model.norm.tgt_std = VecX::Ones(cfg.chunk_dim());
    return model;
}

namespace {

VecX flatten_chunk(const MatX& chunk) {
    const int dim = static_cast<int>(chunk.cols());
    VecX v(chunk.rows() * dim);
    for (int i = 0; i < chunk.rows(); ++i) v.segment(i * dim, dim) = chunk.row(i).transpose();
    return v;
}

MatX unflatten_chunk(const VecX& v, int h, int dim) {
    MatX m(h, dim);
    for (int i = 0; i < h; ++i) m.row(i) = v.segment(i * dim, dim).transpose();
    return m;
}

struct BatchData {
    MatX x;        // N x obs (normalized)
    MatX t;        // N x chunk (normalized)
    MatX w;        // loss weights, 0 on committed steps
};

// Assembles normalized batch matrices from samples.
BatchData assemble(const PolicyModel& model, const std::vector<const TrainingSample*>& batch) {
    const PolicyConfig& cfg = model.config;
    const int dim = kDim + 1;
    const int n = static_cast<int>(batch.size());
    BatchData b;
    b.x.resize(n, cfg.obs_dim());
    b.t.resize(n, cfg.chunk_dim());
    b.w = MatX::Zero(n, cfg.chunk_dim());
    for (int i = 0; i < n; ++i) {
        const TrainingSample& s = *batch[static_cast<std::size_t>(i)];
        b.x.row(i) = model.norm.norm_obs(s.obs).transpose();
        b.t.row(i) = model.norm.norm_tgt(flatten_chunk(s.target_chunk)).transpose();
        int n_inpaint = 0;
        for (auto m : s.mask) n_inpaint += m ? 0 : 1;
        if (n_inpaint == 0) continue;
        double wi = 1.0 / (static_cast<double>(n_inpaint) * dim);
        for (int st = 0; st < cfg.horizon; ++st)
            if (!s.mask[static_cast<std::size_t>(st)])
                b.w.block(i, st * dim, 1, dim).setConstant(wi);
    }
    return b;
}

// One optimizer step on a batch; returns the batch loss.
double grad_step(PolicyModel& model, const BatchData& b, std::mt19937_64& rng, int batch_index) {
    const PolicyConfig& cfg = model.config;
    const int n = static_cast<int>(b.x.rows());
    double loss = 0.0;
    model.net.zero_grad();

    if (cfg.head == HeadKind::kRegression) {
        MatX pred = model.net.forward_cached(b.x);
        MatX res = pred - b.t;
        loss = (b.w.array() * res.array().square()).sum() / n;
        MatX dout = (2.0 / n) * (b.w.array() * res.array()).matrix();
        model.net.backward(dout);
    } else {
        // flow-matching style: x_tau = (1-tau) z + tau target, v* = target - z
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        MatX xin(n, cfg.obs_dim() + cfg.chunk_dim() + 1);
        MatX vstar(n, cfg.chunk_dim());
        for (int i = 0; i < n; ++i) {
            double tau = uni(rng);
            VecX z(cfg.chunk_dim());
            for (int j = 0; j < cfg.chunk_dim(); ++j) z[j] = gauss(rng);
            VecX xt = (1.0 - tau) * z + tau * b.t.row(i).transpose();
            xin.row(i).segment(0, cfg.obs_dim()) = b.x.row(i);
            xin.row(i).segment(cfg.obs_dim(), cfg.chunk_dim()) = xt.transpose();
            xin(i, cfg.obs_dim() + cfg.chunk_dim()) = tau;
            vstar.row(i) = b.t.row(i) - z.transpose();
        }
        MatX pred = model.net.forward_cached(xin);
        MatX res = pred - vstar;
        loss = (b.w.array() * res.array().square()).sum() / n;
        MatX dout = (2.0 / n) * (b.w.array() * res.array()).matrix();
        model.net.backward(dout);
    }

    if (!std::isfinite(loss))
        throw ModelDivergedError("training loss is not finite (lr=" + std::to_string(cfg.lr) +
                                 ", batch=" + std::to_string(batch_index) + ")");
    model.net.adamw_step(cfg.lr, cfg.adam_beta1, cfg.adam_beta2, 1e-8, cfg.weight_decay);
    return loss;
}

void fit_norm_stats(PolicyModel& model, const std::vector<const TrainingSample*>& samples) {
    const PolicyConfig& cfg = model.config;
    VecX om = VecX::Zero(cfg.obs_dim()), os = VecX::Zero(cfg.obs_dim());
    VecX tm = VecX::Zero(cfg.chunk_dim()), ts = VecX::Zero(cfg.chunk_dim());
    for (const TrainingSample* s : samples) {
        om += s->obs;
        tm += flatten_chunk(s->target_chunk);
    }
    double n = static_cast<double>(samples.size());
    om /= n;
    tm /= n;
    for (const TrainingSample* s : samples) {
        os += (s->obs - om).cwiseAbs2();
        ts += (flatten_chunk(s->target_chunk) - tm).cwiseAbs2();
    }
    model.norm.obs_mean = om;
    model.norm.tgt_mean = tm;
    model.norm.obs_std = (os / n).cwiseSqrt().cwiseMax(kStdFloor);
    model.norm.tgt_std = (ts / n).cwiseSqrt().cwiseMax(kStdFloor);
}

double episodes_max_step_delta(const std::vector<Episode>& eps, PolicyMode mode) {
    double d = 0.0;
    for (const Episode& ep : eps)
        for (std::size_t i = 1; i < ep.steps.size(); ++i) {
            const Vec3& a = mode == PolicyMode::kS2S ? ep.steps[i - 1].slave_state
                                                     : ep.steps[i - 1].master_cmd;
            const Vec3& b = mode == PolicyMode::kS2S ? ep.steps[i].slave_state
                                                     : ep.steps[i].master_cmd;
            d = std::max(d, (b - a).cwiseAbs().maxCoeff());
        }
    return d;
}

}  // namespace

TrainReport train(PolicyModel& model, const std::vector<TrainingSample>& samples) {
    const PolicyConfig& cfg = model.config;
    cfg.validate();
    if (samples.empty()) throw ContractError("train: need at least one sample");

    std::vector<const TrainingSample*> ptrs;
    ptrs.reserve(samples.size());
    for (const auto& s : samples) ptrs.push_back(&s);

    fit_norm_stats(model, ptrs);
    for (const auto& s : samples)
        for (int i = 1; i < s.target_chunk.rows(); ++i)
            model.max_step_delta =
                std::max(model.max_step_delta,
                         (s.target_chunk.row(i) - s.target_chunk.row(i - 1)).cwiseAbs().maxCoeff());

    std::mt19937_64 rng = make_rng(cfg.seed, "train");
    TrainReport rep;
    rep.samples_used = static_cast<int>(samples.size());
    int bi = 0;
    for (int e = 0; e < cfg.epochs; ++e) {
        std::shuffle(ptrs.begin(), ptrs.end(), rng);
        double esum = 0.0;
        int nb = 0;
        for (std::size_t at = 0; at < ptrs.size(); at += static_cast<std::size_t>(cfg.batch)) {
            std::size_t hi = std::min(ptrs.size(), at + static_cast<std::size_t>(cfg.batch));
            std::vector<const TrainingSample*> batch(ptrs.begin() + static_cast<long>(at),
                                                     ptrs.begin() + static_cast<long>(hi));
            BatchData b = assemble(model, batch);
            esum += grad_step(model, b, rng, bi++);
            nb++;
        }
        rep.loss_curve.push_back(esum / std::max(1, nb));
    }
    return rep;
}

TrainReport train_on_episodes(PolicyModel& model, const std::vector<Episode>& episodes) {
    const PolicyConfig& cfg = model.config;
    cfg.validate();
    SamplingConfig scfg = cfg.sampling();

    std::vector<std::pair<int, int>> anchors;  // (episode, t)
    TrainReport rep;
    for (std::size_t e = 0; e < episodes.size(); ++e) {
        int n = anchor_count(episodes[e], scfg);
        if (n <= 0) {
            rep.skipped_episodes++;
            continue;
        }
        for (int a = scfg.t_obs - 1; a + scfg.horizon < static_cast<int>(episodes[e].steps.size());
             ++a)
            anchors.emplace_back(static_cast<int>(e), a);
    }
    if (anchors.empty()) throw ContractError("train_on_episodes: no usable anchors");

    std::mt19937_64 rng = make_rng(cfg.seed, "train");
    std::shuffle(anchors.begin(), anchors.end(), rng);
    if (static_cast<int>(anchors.size()) > cfg.max_samples)
        anchors.resize(static_cast<std::size_t>(cfg.max_samples));
    rep.samples_used = static_cast<int>(anchors.size());

    std::uniform_int_distribution<int> kdist(0, cfg.k_max);

    // stats pass with drawn ks
    {
        std::vector<TrainingSample> stat_samples;
        stat_samples.reserve(anchors.size());
        for (auto [e, a] : anchors)
            stat_samples.push_back(make_sample_at(episodes[static_cast<std::size_t>(e)], a,
                                                  kdist(rng), scfg));
        std::vector<const TrainingSample*> ptrs;
        for (const auto& s : stat_samples) ptrs.push_back(&s);
        fit_norm_stats(model, ptrs);
    }
    model.max_step_delta = episodes_max_step_delta(episodes, cfg.mode);

    int bi = 0;
    for (int e = 0; e < cfg.epochs; ++e) {
        std::shuffle(anchors.begin(), anchors.end(), rng);
        double esum = 0.0;
        int nb = 0;
        for (std::size_t at = 0; at < anchors.size(); at += static_cast<std::size_t>(cfg.batch)) {
            std::size_t hi = std::min(anchors.size(), at + static_cast<std::size_t>(cfg.batch));
            std::vector<TrainingSample> storage;
            storage.reserve(hi - at);
            for (std::size_t i = at; i < hi; ++i)
                storage.push_back(make_sample_at(episodes[static_cast<std::size_t>(anchors[i].first)],
                                                 anchors[i].second, kdist(rng), scfg));
            std::vector<const TrainingSample*> batch;
            for (const auto& s : storage) batch.push_back(&s);
            BatchData b = assemble(model, batch);
            esum += grad_step(model, b, rng, bi++);
            nb++;
        }
        rep.loss_curve.push_back(esum / std::max(1, nb));
    }
    return rep;
}

MatX predict_chunk(const PolicyModel& model, const VecX& obs, std::uint64_t refine_seed) {
    const PolicyConfig& cfg = model.config;
    if (obs.size() != cfg.obs_dim())
        throw ContractError("predict_chunk: observation dimension mismatch");
    const int dim = kDim + 1;
    VecX on = model.norm.norm_obs(obs);
    VecX flat;
    if (cfg.head == HeadKind::kRegression) {
        MatX x(1, on.size());
        x.row(0) = on.transpose();
        flat = model.net.forward(x).row(0).transpose();
    } else {
        std::mt19937_64 rng = make_rng(refine_seed, "refine");
        std::normal_distribution<double> gauss(0.0, 1.0);
        VecX xc(cfg.chunk_dim());
        for (int j = 0; j < cfg.chunk_dim(); ++j) xc[j] = gauss(rng);
        int n = std::max(1, cfg.refine_steps);
        MatX x(1, cfg.obs_dim() + cfg.chunk_dim() + 1);
        for (int s = 0; s < n; ++s) {
            double tau = static_cast<double>(s) / n;
            x.row(0).segment(0, cfg.obs_dim()) = on.transpose();
            x.row(0).segment(cfg.obs_dim(), cfg.chunk_dim()) = xc.transpose();
            x(0, cfg.obs_dim() + cfg.chunk_dim()) = tau;
            VecX v = model.net.forward(x).row(0).transpose();
            xc += v / n;
        }
        flat = xc;
    }
    flat = model.norm.denorm_tgt(flat);
    if (!flat.allFinite()) throw ModelDivergedError("predict_chunk: non-finite output");
    return unflatten_chunk(flat, cfg.horizon, dim);
}

bool loss_trend_ok(const std::vector<double>& curve) {
    if (curve.size() < 4) return true;
    std::size_t q = curve.size() / 4;
    double head = std::accumulate(curve.begin(), curve.begin() + static_cast<long>(q), 0.0) / q;
    double tail = std::accumulate(curve.end() - static_cast<long>(q), curve.end(), 0.0) / q;
    return tail < head;
}

void PolicyModel::save(const std::string& path) const {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["mode"] = to_string(config.mode);
    j["horizon"] = config.horizon;
    j["t_exec"] = config.t_exec;
    j["t_obs"] = config.t_obs;
    j["k_max"] = config.k_max;
    j["use_inpainting"] = config.use_inpainting;
    j["hidden"] = config.hidden;
    j["lr"] = config.lr;
    j["adam_beta1"] = config.adam_beta1;
    j["adam_beta2"] = config.adam_beta2;
    j["weight_decay"] = config.weight_decay;
    j["epochs"] = config.epochs;
    j["batch"] = config.batch;
    j["seed"] = config.seed;
    j["head"] = config.head == HeadKind::kRegression ? "regression" : "refinement";
    j["refine_steps"] = config.refine_steps;
    j["max_samples"] = config.max_samples;
    j["visual_dim"] = config.visual_dim;
    j["max_step_delta"] = max_step_delta;
    j["obs_mean"] = std::vector<double>(norm.obs_mean.data(), norm.obs_mean.data() + norm.obs_mean.size());
    j["obs_std"] = std::vector<double>(norm.obs_std.data(), norm.obs_std.data() + norm.obs_std.size());
    j["tgt_mean"] = std::vector<double>(norm.tgt_mean.data(), norm.tgt_mean.data() + norm.tgt_mean.size());
    j["tgt_std"] = std::vector<double>(norm.tgt_std.data(), norm.tgt_std.data() + norm.tgt_std.size());
    j["net"] = net.to_json();
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write checkpoint: " + path);
    out << j.dump();
}

PolicyModel PolicyModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open checkpoint: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ParseError("malformed checkpoint: " + path);
    if (j.at("schema_version").get<int>() != kSchemaVersion)
        throw ParseError("unsupported checkpoint schema in " + path);
    PolicyModel m;
    m.config.mode = policy_mode_from_string(j.at("mode").get<std::string>());
    m.config.horizon = j.at("horizon").get<int>();
    m.config.t_exec = j.at("t_exec").get<int>();
    m.config.t_obs = j.at("t_obs").get<int>();
    m.config.k_max = j.at("k_max").get<int>();
    m.config.use_inpainting = j.at("use_inpainting").get<bool>();
    m.config.hidden = j.at("hidden").get<std::vector<int>>();
    m.config.lr = j.at("lr").get<double>();
    m.config.adam_beta1 = j.at("adam_beta1").get<double>();
    m.config.adam_beta2 = j.at("adam_beta2").get<double>();
    m.config.weight_decay = j.at("weight_decay").get<double>();
    m.config.epochs = j.at("epochs").get<int>();
    m.config.batch = j.at("batch").get<int>();
    m.config.seed = j.at("seed").get<std::uint64_t>();
    m.config.head = j.at("head").get<std::string>() == "refinement" ? HeadKind::kRefinement
                                                                    : HeadKind::kRegression;
    m.config.refine_steps = j.at("refine_steps").get<int>();
    m.config.max_samples = j.at("max_samples").get<int>();
    m.config.visual_dim = j.at("visual_dim").get<int>();
    m.max_step_delta = j.at("max_step_delta").get<double>();
    auto to_vec = [&](const char* key) {
        auto v = j.at(key).get<std::vector<double>>();
        return Eigen::Map<const VecX>(v.data(), static_cast<long>(v.size())).eval();
    };
    m.norm.obs_mean = to_vec("obs_mean");
    m.norm.obs_std = to_vec("obs_std");
    m.norm.tgt_mean = to_vec("tgt_mean");
    m.norm.tgt_std = to_vec("tgt_std");
    m.net = Mlp::from_json(j.at("net"));
    return m;
}

}  // namespace mgap
