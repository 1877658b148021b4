#include "legalqa/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "legalqa/error.hpp"

namespace legalqa::train {
namespace {

constexpr char kMagic[8] = {'L', 'Q', 'P', 'J', '0', '0', '0', '1'};

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    return value;
}

std::vector<double> project_d(const ProjectionModel& m, std::span<const float> x) {
    if (x.size() != m.in_dim) throw Error("projection: input dim mismatch");
    std::vector<double> out(m.out_dim, 0.0);
    for (std::size_t r = 0; r < m.out_dim; ++r) {
        const double* wrow = m.weights.data() + r * m.in_dim;
        double acc = 0.0;
        for (std::size_t c = 0; c < m.in_dim; ++c) acc += wrow[c] * x[c];
        out[r] = acc + (m.bias.empty() ? 0.0 : m.bias[r]);
    }
    return out;
}

double dot(const std::vector<double>& u, const std::vector<double>& v) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
    return acc;
}

}  // namespace

std::vector<float> ProjectionModel::project(std::span<const float> base) const {
    const auto d = project_d(*this, base);
    std::vector<float> out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) out[i] = static_cast<float>(d[i]);
    return out;
}

void ProjectionModel::save(const std::string& path, std::uint64_t seed) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw OutputError("checkpoint: cannot write " + path);
    out.write(kMagic, sizeof(kMagic));
    write_raw(out, static_cast<std::uint32_t>(out_dim));
    write_raw(out, static_cast<std::uint32_t>(in_dim));
    write_raw(out, static_cast<std::uint8_t>(has_bias() ? 1 : 0));
    write_raw(out, seed);
    for (const double w : weights) write_raw(out, static_cast<float>(w));
    for (const double b : bias) write_raw(out, static_cast<float>(b));
    if (!out) throw OutputError("checkpoint: write failed for " + path);
}

ProjectionModel ProjectionModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw SchemaError("checkpoint: bad magic in " + path);
    ProjectionModel m;
    m.out_dim = read_raw<std::uint32_t>(in);
    m.in_dim = read_raw<std::uint32_t>(in);
    const bool with_bias = read_raw<std::uint8_t>(in) == 1;
    read_raw<std::uint64_t>(in);  // seed, informational
    m.weights.resize(m.out_dim * m.in_dim);
    for (auto& w : m.weights) w = read_raw<float>(in);
    if (with_bias) {
        m.bias.resize(m.out_dim);
        for (auto& b : m.bias) b = read_raw<float>(in);
    }
    if (!in) throw SchemaError("checkpoint: truncated file " + path);
    return m;
}

ProjectionModel identity_init(std::size_t out_dim, std::size_t in_dim, std::uint64_t seed,
                              double noise_sigma, bool with_bias) {
    if (out_dim > in_dim) throw Error("identity_init: out_dim must be <= in_dim");
    ProjectionModel m;
    m.out_dim = out_dim;
    m.in_dim = in_dim;
    m.weights.assign(out_dim * in_dim, 0.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (std::size_t r = 0; r < out_dim; ++r) {
        for (std::size_t c = 0; c < in_dim; ++c) {
            m.weights[r * in_dim + c] = (r == c ? 1.0 : 0.0) + noise(rng);
        }
    }
    if (with_bias) {
        m.bias.assign(out_dim, 0.0);
        for (auto& b : m.bias) b = noise(rng);
    }
    return m;
}

double contrastive_loss(double s_pos, std::span<const double> s_negs, double temperature) {
    if (temperature <= 0.0) throw Error("contrastive_loss: temperature must be positive");
    if (s_negs.empty()) return 0.0;
    double max_score = s_pos;
    for (const double s : s_negs) max_score = std::max(max_score, s);
    double denom = std::exp((s_pos - max_score) / temperature);
    for (const double s : s_negs) denom += std::exp((s - max_score) / temperature);
    return -((s_pos - max_score) / temperature - std::log(denom));
}

BatchResult batch_loss_and_grad(std::span<const TrainInstance> batch,
                                const ProjectionModel& model,
                                const dense::EmbeddingStore& questions,
                                const dense::EmbeddingStore& provisions,
                                const TrainConfig& config) {
    if (batch.empty()) throw Error("batch_loss_and_grad: empty batch");
    const double tau = config.temperature;
    if (tau <= 0.0) throw Error("batch_loss_and_grad: temperature must be positive");

    BatchResult result;
    result.grad.weights.assign(model.weights.size(), 0.0);
    if (model.has_bias()) result.grad.bias.assign(model.bias.size(), 0.0);

    // In-batch positives, in batch order.
    std::vector<std::int64_t> batch_positives;
    for (const auto& inst : batch) batch_positives.push_back(inst.positive_id);

    double total_loss = 0.0;
    const double inv_batch = 1.0 / static_cast<double>(batch.size());

    for (const auto& inst : batch) {
        // Candidate provisions: own positive first, then the other
        // in-batch positives, then the hard negatives; duplicates kept once.
        std::vector<std::int64_t> candidates{inst.positive_id};
        auto add_unique = [&](std::int64_t id) {
            if (std::find(candidates.begin(), candidates.end(), id) == candidates.end())
                candidates.push_back(id);
        };
        for (const auto id : batch_positives) {
            if (id != inst.positive_id) add_unique(id);
        }
        for (const auto id : inst.hard_negative_ids) add_unique(id);

        const auto u = project_d(model, questions.vector_for(inst.question_id));
        std::vector<std::vector<double>> v(candidates.size());
        std::vector<double> scores(candidates.size());
        for (std::size_t j = 0; j < candidates.size(); ++j) {
            v[j] = project_d(model, provisions.vector_for(candidates[j]));
            scores[j] = dot(u, v[j]);
        }

        const double s_pos = scores[0];
        const std::span<const double> s_negs{scores.data() + 1, scores.size() - 1};
        total_loss += contrastive_loss(s_pos, s_negs, tau);

        // Softmax over all candidates, with max shift.
        const double max_score = *std::max_element(scores.begin(), scores.end());
        std::vector<double> soft(scores.size());
        double denom = 0.0;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            soft[j] = std::exp((scores[j] - max_score) / tau);
            denom += soft[j];
        }
        for (auto& p : soft) p /= denom;

        // dL/ds_j = (softmax_j - [j == positive]) / tau; then
        // ds_j/dW = v_j q^T + u p_j^T and ds_j/db = u + v_j.
        const auto q = questions.vector_for(inst.question_id);
        for (std::size_t j = 0; j < candidates.size(); ++j) {
            const double coef = (soft[j] - (j == 0 ? 1.0 : 0.0)) / tau * inv_batch;
            if (coef == 0.0) continue;
            const auto p = provisions.vector_for(candidates[j]);
            for (std::size_t r = 0; r < model.out_dim; ++r) {
                double* grow = result.grad.weights.data() + r * model.in_dim;
                const double vj_r = v[j][r];
                const double u_r = u[r];
                for (std::size_t c = 0; c < model.in_dim; ++c) {
                    grow[c] += coef * (vj_r * q[c] + u_r * p[c]);
                }
                if (model.has_bias()) result.grad.bias[r] += coef * (u_r + vj_r);
            }
        }
    }
    result.loss = total_loss * inv_batch;
    return result;
}

TrainResult train(std::vector<TrainInstance> data, const dense::EmbeddingStore& questions,
                  const dense::EmbeddingStore& provisions, const TrainConfig& config,
                  ProjectionModel initial) {
    if (data.empty()) throw Error("train: no training instances");
    for (const auto& inst : data) {
        if (std::find(inst.hard_negative_ids.begin(), inst.hard_negative_ids.end(),
                      inst.positive_id) != inst.hard_negative_ids.end())
            throw Error("train: positive listed among hard negatives for question " +
                        std::to_string(inst.question_id));
    }

    TrainResult result;
    result.model = std::move(initial);
    auto& model = result.model;

    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    std::vector<double> m_w(model.weights.size(), 0.0), v_w(model.weights.size(), 0.0);
    std::vector<double> m_b(model.bias.size(), 0.0), v_b(model.bias.size(), 0.0);
    std::size_t step = 0;

    std::mt19937_64 rng(config.seed);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(data.begin(), data.end(), rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t begin = 0; begin < data.size(); begin += config.batch_size) {
            const auto end = std::min(begin + config.batch_size, data.size());
            const std::span<const TrainInstance> batch{data.data() + begin, end - begin};
            const auto br = batch_loss_and_grad(batch, model, questions, provisions, config);
            if (!std::isfinite(br.loss))
                throw Error("train: non-finite loss at epoch " + std::to_string(epoch) +
                            ", batch " + std::to_string(batches));
            epoch_loss += br.loss;
            ++batches;
            ++step;
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            auto adam_update = [&](std::vector<double>& param, const std::vector<double>& grad,
                                   std::vector<double>& m, std::vector<double>& v) {
                for (std::size_t i = 0; i < param.size(); ++i) {
                    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
                    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
                    const double mhat = m[i] / bc1;
                    const double vhat = v[i] / bc2;
                    param[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + eps);
                }
            };
            adam_update(model.weights, br.grad.weights, m_w, v_w);
            if (model.has_bias()) adam_update(model.bias, br.grad.bias, m_b, v_b);
        }
        result.epoch_losses.push_back(epoch_loss / static_cast<double>(batches));
    }
    return result;
}

}  // namespace legalqa::train
