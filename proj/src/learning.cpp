#include "smartexec/learning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace smartexec::learning {

namespace {

constexpr double kProbClamp = 1e-12;

double clamp_prob(double p) {
    return std::min(std::max(p, kProbClamp), 1.0 - kProbClamp);
}

// Count-valued features get log10(1+v) before z-scoring.
bool is_count_feature(std::size_t index) {
    using namespace loop_ir;
    return index == kIterationsIndex || index == kTotalOpsIndex ||
           index == kFloatOpsIndex || index == kComparisonOpsIndex;
}

Matrix normalized_design(const std::vector<Sample>& samples, const Normalizer& norm) {
    Matrix X(samples.size(), kFeatureCount);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        FeatureVector z = apply_normalizer(norm, samples[i].x);
        for (std::size_t j = 0; j < kFeatureCount; ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = z[j];
    }
    return X;
}

double binary_cross_entropy(const Matrix& X, const Vector& y, const Vector& w) {
    Vector z = X * w;
    double e = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        double mu = clamp_prob(sigmoid(z(i)));
        e -= y(i) * std::log(mu) + (1.0 - y(i)) * std::log(1.0 - mu);
    }
    return e;
}

// Plain row-wise stable softmax, no clamping; used by the trainer where the
// analytic gradient/Hessian formulas assume exact softmax outputs.
Matrix softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (Eigen::Index n = 0; n < logits.rows(); ++n) {
        double m = logits.row(n).maxCoeff();
        Eigen::RowVectorXd e = (logits.row(n).array() - m).exp();
        out.row(n) = e / e.sum();
    }
    return out;
}

Matrix one_hot_targets(const Dataset& data) {
    Matrix t = Matrix::Zero(static_cast<Eigen::Index>(data.samples.size()),
                            static_cast<Eigen::Index>(data.num_classes()));
    for (std::size_t n = 0; n < data.samples.size(); ++n)
        t(static_cast<Eigen::Index>(n), data.samples[n].label) = 1.0;
    return t;
}

double multinomial_ce_raw(const Matrix& X, const Matrix& T, const Matrix& W) {
    Matrix probs = softmax_rows(X * W.transpose());
    double e = 0.0;
    for (Eigen::Index n = 0; n < X.rows(); ++n)
        for (Eigen::Index c = 0; c < T.cols(); ++c)
            if (T(n, c) != 0.0) e -= T(n, c) * std::log(clamp_prob(probs(n, c)));
    return e;
}

void require_all_classes_present(const Dataset& data) {
    std::vector<int> counts(data.num_classes(), 0);
    for (const Sample& s : data.samples) {
        if (s.label < 0 || static_cast<std::size_t>(s.label) >= data.num_classes())
            throw std::invalid_argument("sample label out of range");
        ++counts[static_cast<std::size_t>(s.label)];
    }
    for (std::size_t c = 0; c < counts.size(); ++c)
        if (counts[c] == 0)
            throw std::invalid_argument("class '" + data.class_names[c] +
                                        "' has no samples");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

double sigmoid(double z) {
    double p;
    if (z >= 0) {
        p = 1.0 / (1.0 + std::exp(-z));
    } else {
        double e = std::exp(z);
        p = e / (1.0 + e);
    }
    return clamp_prob(p);
}

Normalizer fit_normalizer(const std::vector<Sample>& samples) {
    if (samples.empty()) throw std::invalid_argument("cannot fit normalizer on empty data");
    Normalizer norm;
    for (std::size_t j = 1; j < kFeatureCount; ++j) {
        auto& t = norm.transforms[j - 1];
        t.log10p1 = is_count_feature(j);
        double sum = 0.0;
        for (const Sample& s : samples) {
            double v = s.x[j];
            if (t.log10p1) v = std::log10(1.0 + v);
            sum += v;
        }
        t.mean = sum / static_cast<double>(samples.size());
        double ss = 0.0;
        for (const Sample& s : samples) {
            double v = s.x[j];
            if (t.log10p1) v = std::log10(1.0 + v);
            ss += (v - t.mean) * (v - t.mean);
        }
        t.stddev = std::sqrt(ss / static_cast<double>(samples.size()));
        if (t.stddev == 0.0) t.stddev = 1.0;
    }
    return norm;
}

FeatureVector apply_normalizer(const Normalizer& n, const FeatureVector& x) {
    FeatureVector out = x;
    for (std::size_t j = 1; j < kFeatureCount; ++j) {
        const auto& t = n.transforms[j - 1];
        double v = x[j];
        if (t.log10p1) v = std::log10(1.0 + v);
        out[j] = (v - t.mean) / t.stddev;
    }
    return out;
}

BinaryFit train_binary_irls(const Dataset& data, const TrainConfig& cfg,
                            const Normalizer* pre_fit) {
    if (data.num_classes() != 2)
        throw std::invalid_argument("binary training needs exactly 2 classes");
    require_all_classes_present(data);

    BinaryFit fit;
    fit.model.normalizer = pre_fit ? *pre_fit : fit_normalizer(data.samples);

    const Matrix X = normalized_design(data.samples, fit.model.normalizer);
    Vector y(X.rows());
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = data.samples[static_cast<std::size_t>(i)].label;

    Vector w = Vector::Zero(kFeatureCount);
    double e = binary_cross_entropy(X, y, w);
    fit.info.objective_trace.push_back(e);

    Vector best_w = w;
    double best_e = e;

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        fit.info.iterations = iter + 1;
        Vector z = X * w;
        Vector mu(z.size()), s(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            mu(i) = sigmoid(z(i));
            s(i) = mu(i) * (1.0 - mu(i));
        }
        Matrix xtsx = X.transpose() * s.asDiagonal() * X;
        xtsx.diagonal().array() += cfg.ridge;
        Vector rhs = X.transpose() * (s.asDiagonal() * (X * w) + (y - mu));
        Vector w_new = xtsx.ldlt().solve(rhs);
        if (!w_new.allFinite()) {
            fit.info.converged = false;
            break;
        }

        double e_new = binary_cross_entropy(X, y, w_new);
        int halvings = 0;
        while (e_new > e && halvings < 20) {
            w_new = 0.5 * (w + w_new);
            e_new = binary_cross_entropy(X, y, w_new);
            ++halvings;
        }
        if (e_new > e) break;  // no acceptable step left; keep best so far

        double step = (w_new - w).cwiseAbs().maxCoeff();
        w = w_new;
        e = e_new;
        fit.info.objective_trace.push_back(e);
        if (e < best_e) {
            best_e = e;
            best_w = w;
        }
        if (step < cfg.tol) {
            fit.info.converged = true;
            break;
        }
    }

    fit.model.w = best_w;
    fit.info.final_cross_entropy = best_e;
    return fit;
}

BinaryPrediction predict_binary(const BinaryModel& model, const FeatureVector& x) {
    FeatureVector z = apply_normalizer(model.normalizer, x);
    double dot = 0.0;
    for (std::size_t j = 0; j < kFeatureCount; ++j) dot += model.w(static_cast<Eigen::Index>(j)) * z[j];
    double p = sigmoid(dot);
    return {p > 0.5 ? 1 : 0, p};
}

Vector softmax_probs(const MultinomialModel& model, const FeatureVector& x) {
    const auto c = static_cast<Eigen::Index>(model.num_classes());
    Vector z = to_eigen(apply_normalizer(model.normalizer, x));
    Vector logits = model.weights * z;
    double m = logits.maxCoeff();
    Vector probs = (logits.array() - m).exp();
    probs /= probs.sum();

    // Clamp into [eps, 1-eps]; fold the redistributed mass into the largest
    // entry so the row keeps summing to 1.
    Eigen::Index arg = 0;
    probs.maxCoeff(&arg);
    double moved = 0.0;
    for (Eigen::Index i = 0; i < c; ++i) {
        if (i == arg) continue;
        double clamped = clamp_prob(probs(i));
        moved += clamped - probs(i);
        probs(i) = clamped;
    }
    probs(arg) = std::min(probs(arg) - moved, 1.0 - kProbClamp);
    return probs;
}

double cross_entropy(const MultinomialModel& model, const Dataset& data) {
    double e = 0.0;
    for (const Sample& s : data.samples) {
        Vector probs = softmax_probs(model, s.x);
        e -= std::log(probs(s.label));
    }
    return e;
}

Matrix multinomial_gradient(const MultinomialModel& model, const Dataset& data) {
    const Matrix X = normalized_design(data.samples, model.normalizer);
    const Matrix T = one_hot_targets(data);
    Matrix probs = softmax_rows(X * model.weights.transpose());
    return (probs - T).transpose() * X;
}

Matrix multinomial_hessian(const MultinomialModel& model, const Dataset& data) {
    const auto c = static_cast<Eigen::Index>(model.num_classes());
    const auto k = static_cast<Eigen::Index>(kFeatureCount);
    const Matrix X = normalized_design(data.samples, model.normalizer);
    Matrix probs = softmax_rows(X * model.weights.transpose());

    Matrix h = Matrix::Zero(c * k, c * k);
    for (Eigen::Index n = 0; n < X.rows(); ++n) {
        Matrix outer = X.row(n).transpose() * X.row(n);
        for (Eigen::Index i = 0; i < c; ++i) {
            for (Eigen::Index j = 0; j < c; ++j) {
                double scale = probs(n, i) * ((i == j ? 1.0 : 0.0) - probs(n, j));
                h.block(i * k, j * k, k, k) += scale * outer;
            }
        }
    }
    return h;
}

MultinomialFit train_multinomial_newton(const Dataset& data, const TrainConfig& cfg,
                                        const Normalizer* pre_fit) {
    const auto c = static_cast<Eigen::Index>(data.num_classes());
    const auto k = static_cast<Eigen::Index>(kFeatureCount);
    if (c < 2) throw std::invalid_argument("multinomial training needs at least 2 classes");
    require_all_classes_present(data);

    MultinomialFit fit;
    fit.model.class_names = data.class_names;
    fit.model.normalizer = pre_fit ? *pre_fit : fit_normalizer(data.samples);
    fit.model.weights = Matrix::Zero(c, k);

    const Matrix X = normalized_design(data.samples, fit.model.normalizer);
    const Matrix T = one_hot_targets(data);
    const Eigen::Index free_rows = c - 1;  // last class row pinned to zero

    Matrix w = fit.model.weights;
    double e = multinomial_ce_raw(X, T, w);
    fit.info.objective_trace.push_back(e);

    Matrix best_w = w;
    double best_e = e;

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        fit.info.iterations = iter + 1;
        fit.model.weights = w;
        Matrix grad = (softmax_rows(X * w.transpose()) - T).transpose() * X;
        Matrix hess = multinomial_hessian(fit.model, data);

        Vector g_free(free_rows * k);
        for (Eigen::Index i = 0; i < free_rows; ++i)
            g_free.segment(i * k, k) = grad.row(i).transpose();
        Matrix h_free = hess.topLeftCorner(free_rows * k, free_rows * k);

        // Escalate the damping until the system yields a finite step.
        double lambda = cfg.ridge;
        Vector delta;
        bool solved = false;
        while (lambda <= 1e-2) {
            Matrix damped = h_free;
            damped.diagonal().array() += lambda;
            delta = damped.ldlt().solve(g_free);
            if (delta.allFinite()) {
                solved = true;
                break;
            }
            lambda = (lambda == 0.0) ? 1e-6 : lambda * 10.0;
        }
        if (!solved) {
            fit.info.converged = false;
            break;
        }

        Matrix w_new = w;
        for (Eigen::Index i = 0; i < free_rows; ++i)
            w_new.row(i) -= delta.segment(i * k, k).transpose();

        double e_new = multinomial_ce_raw(X, T, w_new);
        int halvings = 0;
        while (e_new > e && halvings < 20) {
            w_new = 0.5 * (w + w_new);
            e_new = multinomial_ce_raw(X, T, w_new);
            ++halvings;
        }
        if (e_new > e) break;

        double step = (w_new - w).cwiseAbs().maxCoeff();
        w = w_new;
        e = e_new;
        fit.info.objective_trace.push_back(e);
        if (e < best_e) {
            best_e = e;
            best_w = w;
        }
        if (step < cfg.tol) {
            fit.info.converged = true;
            break;
        }
    }

    fit.model.weights = best_w;
    fit.info.final_cross_entropy = best_e;
    return fit;
}

ClassPrediction predict_class(const MultinomialModel& model, const FeatureVector& x) {
    ClassPrediction pred;
    pred.probs = softmax_probs(model, x);
    Eigen::Index arg = 0;
    pred.probs.maxCoeff(&arg);  // first of equal maxima
    pred.label = static_cast<int>(arg);
    return pred;
}

std::array<double, 3> quartile_edges(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    auto percentile = [&](double p) {
        if (values.size() == 1) return values[0];
        double pos = p * static_cast<double>(values.size() - 1);
        auto lo = static_cast<std::size_t>(pos);
        double frac = pos - static_cast<double>(lo);
        if (lo + 1 >= values.size()) return values.back();
        return values[lo] + frac * (values[lo + 1] - values[lo]);
    };
    return {percentile(0.25), percentile(0.50), percentile(0.75)};
}

int quartile_bin(const std::array<double, 3>& edges, double value) {
    if (value <= edges[0]) return 0;
    if (value <= edges[1]) return 1;
    if (value <= edges[2]) return 2;
    return 3;
}

namespace {

double entropy(const std::vector<std::size_t>& counts, std::size_t total) {
    if (total == 0) return 0.0;
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

}  // namespace

std::vector<std::size_t> select_features_info_gain(const Matrix& features,
                                                   const std::vector<int>& labels,
                                                   std::size_t num_classes, std::size_t k) {
    const auto n = static_cast<std::size_t>(features.rows());
    const auto f = static_cast<std::size_t>(features.cols());
    if (k > f) throw std::invalid_argument("k exceeds feature count");
    if (n == 0 || labels.size() != n)
        throw std::invalid_argument("features/labels size mismatch");

    std::vector<std::size_t> label_counts(num_classes, 0);
    for (int l : labels) ++label_counts[static_cast<std::size_t>(l)];
    double h_label = entropy(label_counts, n);

    std::vector<std::pair<double, std::size_t>> ranked;  // (-gain, index)
    for (std::size_t j = 0; j < f; ++j) {
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        auto edges = quartile_edges(col);

        std::array<std::vector<std::size_t>, 4> bin_counts;
        bin_counts.fill(std::vector<std::size_t>(num_classes, 0));
        std::array<std::size_t, 4> bin_totals{};
        for (std::size_t i = 0; i < n; ++i) {
            int b = quartile_bin(edges, col[i]);
            ++bin_counts[static_cast<std::size_t>(b)][static_cast<std::size_t>(labels[i])];
            ++bin_totals[static_cast<std::size_t>(b)];
        }
        double h_cond = 0.0;
        for (int b = 0; b < 4; ++b) {
            double weight = static_cast<double>(bin_totals[static_cast<std::size_t>(b)]) /
                            static_cast<double>(n);
            h_cond += weight * entropy(bin_counts[static_cast<std::size_t>(b)],
                                       bin_totals[static_cast<std::size_t>(b)]);
        }
        ranked.emplace_back(-(h_label - h_cond), j);
    }
    std::sort(ranked.begin(), ranked.end());

    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = ranked[i].second;
    return out;
}

// ---------------------------------------------------------------------------
// weights.dat serialization

namespace {

const char* kMagic = "hpxml-weights";
const char* kFeaturesLine =
    "features bias threads iterations total_ops float_ops comparison_ops loop_level";

class WeightsParser {
public:
    explicit WeightsParser(const std::string& text) : in_(text) {}

    WeightsBundle parse() {
        WeightsBundle bundle;

        std::vector<std::string> header = next_tokens("file header");
        if (header.size() != 2 || header[0] != kMagic)
            fail("expected 'hpxml-weights v1' header");
        if (header[1] != "v1") fail("unknown format version '" + header[1] + "'");

        if (join(next_tokens("features line")) != kFeaturesLine) fail("bad features line");

        Normalizer norm;
        for (std::size_t j = 1; j < kFeatureCount; ++j) {
            std::vector<std::string> t = next_tokens("normalizer line");
            if (t.size() != 5 || t[0] != "normalizer" || t[1] != loop_ir::kFeatureNames[j])
                fail(std::string("expected normalizer line for '") +
                     loop_ir::kFeatureNames[j] + "'");
            if (t[2] != "0" && t[2] != "1") fail("normalizer log10p1 flag must be 0 or 1");
            auto& tr = norm.transforms[j - 1];
            tr.log10p1 = t[2] == "1";
            tr.mean = parse_finite(t[3]);
            tr.stddev = parse_finite(t[4]);
            if (tr.stddev <= 0.0) fail("normalizer stddev must be positive");
        }

        std::vector<std::string> bin = next_tokens("binary policy line");
        if (bin.size() < 2 || bin[0] != "binary" || bin[1] != "policy")
            fail("expected 'binary policy' line");
        if (bin.size() != 2 + kFeatureCount)
            fail("binary weight row has " + std::to_string(bin.size() - 2) +
                 " columns, expected " + std::to_string(kFeatureCount));
        for (std::size_t j = 0; j < kFeatureCount; ++j)
            bundle.policy_model.w(static_cast<Eigen::Index>(j)) = parse_finite(bin[2 + j]);
        bundle.policy_model.normalizer = norm;

        bundle.chunk_model = parse_multinomial("chunk", kChunkClassNames, norm);
        bundle.prefetch_model = parse_multinomial("prefetch", kPrefetchClassNames, norm);

        std::vector<std::string> rest = next_tokens_or_empty();
        if (!rest.empty()) fail("unexpected trailing content");
        return bundle;
    }

private:
    MultinomialModel parse_multinomial(const std::string& which,
                                       const std::vector<std::string>& classes,
                                       const Normalizer& norm) {
        std::vector<std::string> head = next_tokens("multinomial header");
        std::vector<std::string> expected = {"multinomial", which, "classes"};
        expected.insert(expected.end(), classes.begin(), classes.end());
        if (head != expected) fail("bad 'multinomial " + which + " classes' line");

        MultinomialModel model;
        model.class_names = classes;
        model.normalizer = norm;
        model.weights = Matrix::Zero(static_cast<Eigen::Index>(classes.size()), kFeatureCount);
        for (std::size_t r = 0; r < classes.size(); ++r) {
            std::vector<std::string> row = next_tokens("weight row");
            if (row.empty() || row[0] != "row") fail("expected 'row' line");
            if (row.size() != 1 + kFeatureCount)
                fail("weight row has " + std::to_string(row.size() - 1) +
                     " columns, expected " + std::to_string(kFeatureCount));
            for (std::size_t j = 0; j < kFeatureCount; ++j)
                model.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
                    parse_finite(row[1 + j]);
        }
        if (model.weights.row(model.weights.rows() - 1).cwiseAbs().maxCoeff() != 0.0)
            fail("last class row must be all zeros");
        return model;
    }

    std::vector<std::string> next_tokens_or_empty() {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            std::istringstream ls(line);
            std::vector<std::string> tokens;
            std::string tok;
            while (ls >> tok) tokens.push_back(tok);
            if (!tokens.empty()) return tokens;
        }
        return {};
    }

    std::vector<std::string> next_tokens(const char* what) {
        std::vector<std::string> tokens = next_tokens_or_empty();
        if (tokens.empty()) fail(std::string("unexpected end of file, wanted ") + what);
        return tokens;
    }

    double parse_finite(const std::string& tok) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            fail("bad number '" + tok + "'");
        }
        if (used != tok.size()) fail("bad number '" + tok + "'");
        if (!std::isfinite(v)) fail("non-finite value '" + tok + "'");
        return v;
    }

    static std::string join(const std::vector<std::string>& tokens) {
        std::string out;
        for (const std::string& t : tokens) {
            if (!out.empty()) out += ' ';
            out += t;
        }
        return out;
    }

    [[noreturn]] void fail(const std::string& message) {
        throw std::runtime_error("weights file line " + std::to_string(line_no_) + ": " +
                                 message);
    }

    std::istringstream in_;
    int line_no_ = 0;
};

void require_finite_model(const WeightsBundle& bundle) {
    if (!bundle.policy_model.w.allFinite() || !bundle.chunk_model.weights.allFinite() ||
        !bundle.prefetch_model.weights.allFinite())
        throw std::invalid_argument("bundle contains non-finite weights");
    for (const Normalizer* n :
         {&bundle.policy_model.normalizer, &bundle.chunk_model.normalizer,
          &bundle.prefetch_model.normalizer}) {
        for (const auto& t : n->transforms)
            if (!std::isfinite(t.mean) || !std::isfinite(t.stddev) || t.stddev <= 0.0)
                throw std::invalid_argument("bundle normalizer is not finite/positive");
    }
}

}  // namespace

std::string serialize_weights(const WeightsBundle& bundle) {
    if (bundle.format_version != 1)
        throw std::invalid_argument("unsupported format version");
    if (bundle.chunk_model.class_names != kChunkClassNames)
        throw std::invalid_argument("chunk model classes must be 0.001 0.01 0.10 0.50");
    if (bundle.prefetch_model.class_names != kPrefetchClassNames)
        throw std::invalid_argument("prefetch model classes must be 1 5 10 100 500");
    if (!(bundle.policy_model.normalizer == bundle.chunk_model.normalizer) ||
        !(bundle.policy_model.normalizer == bundle.prefetch_model.normalizer))
        throw std::invalid_argument("bundle models must share one normalizer");
    require_finite_model(bundle);

    std::string out = std::string(kMagic) + " v1\n" + kFeaturesLine + "\n";
    for (std::size_t j = 1; j < kFeatureCount; ++j) {
        const auto& t = bundle.policy_model.normalizer.transforms[j - 1];
        out += std::string("normalizer ") + loop_ir::kFeatureNames[j] + ' ' +
               (t.log10p1 ? "1" : "0") + ' ' + format_double(t.mean) + ' ' +
               format_double(t.stddev) + '\n';
    }
    out += "binary policy";
    for (std::size_t j = 0; j < kFeatureCount; ++j)
        out += ' ' + format_double(bundle.policy_model.w(static_cast<Eigen::Index>(j)));
    out += '\n';

    auto write_multinomial = [&out](const MultinomialModel& m, const std::string& which) {
        out += "multinomial " + which + " classes";
        for (const std::string& c : m.class_names) out += ' ' + c;
        out += '\n';
        for (Eigen::Index r = 0; r < m.weights.rows(); ++r) {
            out += "row";
            for (Eigen::Index j = 0; j < m.weights.cols(); ++j)
                out += ' ' + format_double(m.weights(r, j));
            out += '\n';
        }
    };
    write_multinomial(bundle.chunk_model, "chunk");
    write_multinomial(bundle.prefetch_model, "prefetch");
    return out;
}

WeightsBundle parse_weights(const std::string& text) {
    return WeightsParser(text).parse();
}

void save_weights(const WeightsBundle& bundle, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << serialize_weights(bundle);
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

WeightsBundle load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open weights file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_weights(buf.str());
}

// ---------------------------------------------------------------------------
// dataset CSV

namespace {
const char* kCsvHeader =
    "threads,iterations,total_ops,float_ops,comparison_ops,loop_level,label";
}

Dataset load_dataset_csv(const std::string& path,
                         const std::vector<std::string>& class_names) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw std::runtime_error("dataset '" + path + "': bad or missing header");

    Dataset data;
    data.class_names = class_names;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 7)
            throw std::runtime_error("dataset '" + path + "' line " +
                                     std::to_string(line_no) + ": expected 7 fields");
        Sample s;
        s.x[0] = 1.0;
        for (std::size_t j = 0; j < 6; ++j) {
            try {
                s.x[j + 1] = std::stod(fields[j]);
            } catch (const std::exception&) {
                throw std::runtime_error("dataset '" + path + "' line " +
                                         std::to_string(line_no) + ": bad number '" +
                                         fields[j] + "'");
            }
        }
        auto it = std::find(class_names.begin(), class_names.end(), fields[6]);
        if (it == class_names.end())
            throw std::runtime_error("dataset '" + path + "' line " +
                                     std::to_string(line_no) + ": unknown label '" +
                                     fields[6] + "'");
        s.label = static_cast<int>(it - class_names.begin());
        data.samples.push_back(s);
    }
    if (data.samples.empty())
        throw std::runtime_error("dataset '" + path + "' has no rows");
    return data;
}

void write_dataset_csv_header(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << kCsvHeader << '\n';
}

void append_dataset_csv(const std::string& path, const Sample& sample,
                        const std::vector<std::string>& class_names) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for appending");
    for (std::size_t j = 1; j < kFeatureCount; ++j)
        out << format_double(sample.x[j]) << ',';
    out << class_names.at(static_cast<std::size_t>(sample.label)) << '\n';
}

Vector to_eigen(const FeatureVector& x) {
    Vector v(kFeatureCount);
    for (std::size_t j = 0; j < kFeatureCount; ++j) v(static_cast<Eigen::Index>(j)) = x[j];
    return v;
}

FeatureVector from_eigen(const Vector& v) {
    FeatureVector x{};
    for (std::size_t j = 0; j < kFeatureCount && j < static_cast<std::size_t>(v.size()); ++j)
        x[j] = v(static_cast<Eigen::Index>(j));
    return x;
}

}  // namespace smartexec::learning
