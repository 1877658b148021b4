#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "legalqa/dense.hpp"

namespace legalqa::train {

// Shared linear projection applied to both question and provision
// embeddings (siamese: one set of weights for the two sides).
struct ProjectionModel {
    std::size_t out_dim = 0;
    std::size_t in_dim = 0;
    std::vector<double> weights;  // row-major out_dim x in_dim
    std::vector<double> bias;     // empty, or out_dim entries

    bool has_bias() const { return !bias.empty(); }

    std::vector<float> project(std::span<const float> base) const;

    /// Checkpoint: version tag, dims, seed, weights (+bias) as f32.
    void save(const std::string& path, std::uint64_t seed = 0) const;
    static ProjectionModel load(const std::string& path);
};

/// Identity truncated to out_dim x in_dim plus seeded Gaussian noise.
ProjectionModel identity_init(std::size_t out_dim, std::size_t in_dim, std::uint64_t seed,
                              double noise_sigma = 0.01, bool with_bias = false);

struct TrainConfig {
    double temperature = 0.01;
    std::size_t batch_size = 16;
    std::size_t hard_negatives_per_query = 1;
    double learning_rate = 1e-3;
    int epochs = 10;
    std::uint64_t seed = 0;
};

struct TrainInstance {
    std::int64_t question_id = 0;
    std::int64_t positive_id = 0;
    std::vector<std::int64_t> hard_negative_ids;  // never contains positive_id
};

/// Softmax cross-entropy of the positive against the negatives, computed
/// with a max shift. Empty negatives means the positive is the sole
/// candidate and the loss is 0.
double contrastive_loss(double s_pos, std::span<const double> s_negs, double temperature);

struct Gradient {
    std::vector<double> weights;
    std::vector<double> bias;
};

struct BatchResult {
    double loss = 0.0;
    Gradient grad;
};

/// Mean per-query loss over candidates = {own positive} u {other
/// in-batch positives} u {own hard negatives}, with the exact analytic
/// gradient w.r.t. the projection. Scores are dot products of projected
/// vectors. Duplicate candidate provisions are collapsed to one.
BatchResult batch_loss_and_grad(std::span<const TrainInstance> batch,
                                const ProjectionModel& model,
                                const dense::EmbeddingStore& questions,
                                const dense::EmbeddingStore& provisions,
                                const TrainConfig& config);

struct TrainResult {
    ProjectionModel model;
    std::vector<double> epoch_losses;  // mean batch loss per epoch
};

/// Adam loop (b1=0.9, b2=0.999, eps=1e-8), seeded shuffling and init;
/// deterministic given the seed. Aborts on non-finite loss.
TrainResult train(std::vector<TrainInstance> data, const dense::EmbeddingStore& questions,
                  const dense::EmbeddingStore& provisions, const TrainConfig& config,
                  ProjectionModel initial);

}  // namespace legalqa::train
