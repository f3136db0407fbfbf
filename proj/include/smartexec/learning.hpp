#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "smartexec/loop_ir.hpp"

// Binary and multinomial logistic regression, trained with IRLS and
// Newton-Raphson respectively, plus the feature normalization, information
// gain feature selection, and weights-bundle persistence around them.
//
// Feature vectors enter every public function on the raw scale; models carry
// their normalizer and apply it internally.

namespace smartexec::learning {

using loop_ir::FeatureVector;
using loop_ir::kFeatureCount;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Sample {
    FeatureVector x;  // raw scale, x[0] == 1
    int label = 0;    // binary: 0/1; multinomial: 0..C-1
};

struct Dataset {
    std::vector<Sample> samples;
    std::vector<std::string> class_names;

    std::size_t num_classes() const { return class_names.size(); }
};

// Binary class order is fixed: class 0 executes sequentially, class 1 in
// parallel.  Dataset labels and the decision mapping both follow this list.
inline const std::vector<std::string> kBinaryClassNames = {"seq", "par"};

// Per-feature transform: optionally log10(1+v), then z-score with the
// training mean/stddev.  The bias entry is never touched.
struct Normalizer {
    struct FeatureTransform {
        bool log10p1 = false;
        double mean = 0.0;
        double stddev = 1.0;

        bool operator==(const FeatureTransform&) const = default;
    };
    std::array<FeatureTransform, kFeatureCount - 1> transforms;  // non-bias entries

    bool operator==(const Normalizer&) const = default;
};

// Count-valued features (iterations and the three op counts) get the
// log10(1+v) mapping; constant features fall back to stddev 1.
Normalizer fit_normalizer(const std::vector<Sample>& samples);
FeatureVector apply_normalizer(const Normalizer& n, const FeatureVector& x);

struct BinaryModel {
    Eigen::Matrix<double, kFeatureCount, 1> w = Eigen::Matrix<double, kFeatureCount, 1>::Zero();
    Normalizer normalizer;
};

struct MultinomialModel {
    Matrix weights;  // C x kFeatureCount, last row pinned to zero
    std::vector<std::string> class_names;
    Normalizer normalizer;

    std::size_t num_classes() const { return class_names.size(); }
};

struct TrainConfig {
    int max_iters = 100;
    double tol = 1e-8;   // infinity norm of the weight change
    double ridge = 1e-6;
};

struct FitInfo {
    bool converged = false;
    int iterations = 0;
    double final_cross_entropy = 0.0;
    std::vector<double> objective_trace;  // cross-entropy after each accepted step
};

struct BinaryFit {
    BinaryModel model;
    FitInfo info;
};

struct MultinomialFit {
    MultinomialModel model;
    FitInfo info;
};

// Numerically stable logistic; result clamped to [1e-12, 1 - 1e-12].
double sigmoid(double z);

// IRLS from w = 0, solving (X'SX + ridge*I) w_new = X'(SXw + y - mu) each
// step, with step halving whenever the cross-entropy would increase.  The
// dataset must contain both classes.  When `pre_fit` is given it is used
// instead of fitting a normalizer on `data` (the weights bundle stores one
// normalizer shared by its three models).
BinaryFit train_binary_irls(const Dataset& data, const TrainConfig& cfg = {},
                            const Normalizer* pre_fit = nullptr);

struct BinaryPrediction {
    int label = 0;       // 1 iff p > 0.5 (exact tie goes to class 0)
    double p = 0.0;      // probability of class 1
};

BinaryPrediction predict_binary(const BinaryModel& model, const FeatureVector& x);

// Softmax with max-logit subtraction; entries clamped into
// [1e-12, 1 - 1e-12] with the excess folded into the largest entry so the
// row still sums to 1.
Vector softmax_probs(const MultinomialModel& model, const FeatureVector& x);

double cross_entropy(const MultinomialModel& model, const Dataset& data);

// Gradient of the cross-entropy w.r.t. each class row: sum_n (y_nc - t_nc) x_n.
Matrix multinomial_gradient(const MultinomialModel& model, const Dataset& data);

// Full (C*K) x (C*K) Hessian with blocks sum_n y_ni (delta_ij - y_nj) x_n x_n'.
Matrix multinomial_hessian(const MultinomialModel& model, const Dataset& data);

// Newton-Raphson over the free rows (the last class row stays pinned to
// zero), ridge-damped, with step halving and lambda escalation up to 1e-2
// when the damped system cannot be solved.  Every class must appear in the
// data at least once.
MultinomialFit train_multinomial_newton(const Dataset& data, const TrainConfig& cfg = {},
                                        const Normalizer* pre_fit = nullptr);

struct ClassPrediction {
    int label = 0;  // argmax; ties break toward the smaller class index
    Vector probs;
};

ClassPrediction predict_class(const MultinomialModel& model, const FeatureVector& x);

// Ranks features by the information gain of the label w.r.t. the feature
// discretized into quartile bins, descending; ties break toward the lower
// feature index.  `features` is N x F on any layout (typically the full
// 12-feature rows).
std::vector<std::size_t> select_features_info_gain(const Matrix& features,
                                                   const std::vector<int>& labels,
                                                   std::size_t num_classes, std::size_t k);

// Quartile bin assignment shared with the selection oracle in the tests:
// edges are the 25/50/75 percentiles (linear interpolation) of the training
// values; a value lands in the first bin whose edge it does not exceed.
std::array<double, 3> quartile_edges(std::vector<double> values);
int quartile_bin(const std::array<double, 3>& edges, double value);

inline const std::vector<std::string> kChunkClassNames = {"0.001", "0.01", "0.10", "0.50"};
inline const std::vector<std::string> kPrefetchClassNames = {"1", "5", "10", "100", "500"};

inline const std::vector<double> kChunkFractions = {0.001, 0.01, 0.10, 0.50};
inline const std::vector<int> kPrefetchDistances = {1, 5, 10, 100, 500};

// Everything dispatch needs, persisted as one weights.dat file.  The three
// models share a single normalizer; save_weights rejects bundles whose
// models disagree on it.
struct WeightsBundle {
    BinaryModel policy_model;
    MultinomialModel chunk_model;     // classes = kChunkClassNames
    MultinomialModel prefetch_model;  // classes = kPrefetchClassNames
    int format_version = 1;
};

void save_weights(const WeightsBundle& bundle, const std::string& path);
WeightsBundle load_weights(const std::string& path);

std::string serialize_weights(const WeightsBundle& bundle);
WeightsBundle parse_weights(const std::string& text);

// Dataset CSV: header `threads,iterations,total_ops,float_ops,
// comparison_ops,loop_level,label`, label drawn from `class_names`.
Dataset load_dataset_csv(const std::string& path, const std::vector<std::string>& class_names);
void append_dataset_csv(const std::string& path, const Sample& sample,
                        const std::vector<std::string>& class_names);
void write_dataset_csv_header(const std::string& path);

// Helpers shared by training and prediction.
Vector to_eigen(const FeatureVector& x);
FeatureVector from_eigen(const Vector& v);

}  // namespace smartexec::learning
