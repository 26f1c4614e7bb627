#include "evpr/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "evpr/errors.hpp"

namespace evpr {

std::vector<LatentSequence> build_sequences(const TensorPtr& mu,
                                            const std::vector<std::pair<double, double>>& coords,
                                            int k, int seq_len) {
    if (mu->shape.size() != 2) throw ShapeError("build_sequences: mu must be [n,latent]");
    const int n = mu->shape[0];
    const int latent = mu->shape[1];
    if (k < 1 || k > latent) {
        throw ShapeError("build_sequences: excitation width " + std::to_string(k) +
                         " outside [1," + std::to_string(latent) + "]");
    }
    if (seq_len < 1) throw ConfigError("build_sequences: sequence length must be >= 1");
    if (static_cast<int>(coords.size()) != n) {
        throw ShapeError("build_sequences: " + std::to_string(coords.size()) + " coordinates for " +
                         std::to_string(n) + " samples");
    }
    if (n < seq_len) {
        throw ConfigError("build_sequences: need at least " + std::to_string(seq_len) +
                          " samples, got " + std::to_string(n));
    }

    std::vector<LatentSequence> out;
    out.reserve(n - seq_len + 1);
    for (int start = 0; start + seq_len <= n; ++start) {
        LatentSequence s;
        s.rows = seq_len;
        s.cols = k;
        s.data.resize(static_cast<size_t>(seq_len) * k);
        for (int r = 0; r < seq_len; ++r) {
            const double* src = mu->value.data() + static_cast<size_t>(start + r) * latent;
            std::copy_n(src, k, s.data.begin() + static_cast<size_t>(r) * k);
        }
        const auto& mid = coords[start + seq_len / 2];  // third of five
        s.x_m = mid.first;
        s.y_m = mid.second;
        out.push_back(std::move(s));
    }
    return out;
}

ReferenceDatabase build_reference_db(const TensorPtr& mu,
                                     const std::vector<std::pair<double, double>>& coords,
                                     int k, int seq_len) {
    ReferenceDatabase db;
    db.seq_len = seq_len;
    db.dim = k;
    db.sequences = build_sequences(mu, coords, k, seq_len);
    return db;
}

double cosine_similarity_seq(const LatentSequence& a, const LatentSequence& b) {
    if (a.rows != b.rows || a.cols != b.cols) {
        throw ShapeError("cosine_similarity_seq: sequence shapes disagree (" + std::to_string(a.rows) +
                         "x" + std::to_string(a.cols) + " vs " + std::to_string(b.rows) + "x" +
                         std::to_string(b.cols) + ")");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        dot += a.data[i] * b.data[i];
        na += a.data[i] * a.data[i];
        nb += b.data[i] * b.data[i];
    }
    if (na == 0.0 || nb == 0.0) {
        throw NumericsError("cosine_similarity_seq: all-zero sequence has undefined similarity");
    }
    if (a.data == b.data) return 1.0;  // self similarity is exact by definition
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

LocalizeResult localize(const LatentSequence& query, const ReferenceDatabase& db) {
    if (db.sequences.empty()) throw ConfigError("localize: empty reference database");
    LocalizeResult best;
    for (size_t i = 0; i < db.sequences.size(); ++i) {
        const double sim = cosine_similarity_seq(query, db.sequences[i]);
        if (sim > best.similarity) {
            best.similarity = sim;
            best.index = static_cast<int>(i);
            best.x_m = db.sequences[i].x_m;
            best.y_m = db.sequences[i].y_m;
        }
    }
    return best;
}

LocalizationReport localization_report(const std::vector<LatentSequence>& queries,
                                       const ReferenceDatabase& db) {
    LocalizationReport rep;
    rep.errors_m.reserve(queries.size());
    double max_err = 0.0;
    for (const LatentSequence& q : queries) {
        const LocalizeResult r = localize(q, db);
        const double err = std::hypot(r.x_m - q.x_m, r.y_m - q.y_m);
        rep.errors_m.push_back(err);
        max_err = std::max(max_err, err);
    }

    const double thresholds[] = {0.25, 0.5, 1.0, 2.0};
    for (double th : thresholds) {
        int below = 0;
        for (double e : rep.errors_m) {
            if (e < th) ++below;
        }
        rep.frac_below.push_back({th, queries.empty() ? 0.0 : static_cast<double>(below) / queries.size()});
    }

    constexpr double kBin = 0.25;
    const int n_bins = std::max(1, static_cast<int>(std::floor(max_err / kBin)) + 1);
    std::vector<int> counts(n_bins, 0);
    for (double e : rep.errors_m) {
        int b = std::min(static_cast<int>(std::floor(e / kBin)), n_bins - 1);
        ++counts[b];
    }
    for (int b = 0; b < n_bins; ++b) {
        rep.histogram.push_back({b * kBin, (b + 1) * kBin, static_cast<double>(counts[b])});
    }
    return rep;
}

std::string LocalizationReport::thresholds_csv() const {
    std::string out = "threshold_m,fraction\n";
    char line[64];
    for (const auto& [th, frac] : frac_below) {
        std::snprintf(line, sizeof(line), "%.2f,%.6f\n", th, frac);
        out += line;
    }
    return out;
}

std::string LocalizationReport::histogram_csv() const {
    std::string out = "bin_lo_m,bin_hi_m,count\n";
    char line[96];
    for (const auto& bin : histogram) {
        std::snprintf(line, sizeof(line), "%.2f,%.2f,%d\n", bin[0], bin[1], static_cast<int>(bin[2]));
        out += line;
    }
    return out;
}

}  // namespace evpr
