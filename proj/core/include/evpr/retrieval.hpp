#pragma once

#include <array>
#include <string>
#include <vector>

#include "evpr/tensor.hpp"

namespace evpr {

// A window of consecutive excitation vectors (rows in time order) anchored
// at the ground-truth coordinate of its middle element.
struct LatentSequence {
    int rows = 5;
    int cols = 0;
    std::vector<double> data;  // rows*cols, row-major
    double x_m = 0.0;
    double y_m = 0.0;
};

// Immutable after build; scanned exhaustively at query time.
struct ReferenceDatabase {
    int seq_len = 5;
    int dim = 0;
    std::vector<LatentSequence> sequences;
};

// Overlapping stride-1 windows over time-ordered samples: n samples yield
// n - seq_len + 1 sequences. mu is [n, latent_dim]; the excitation block is
// its first k columns. coords[i] is sample i's ground-truth position.
std::vector<LatentSequence> build_sequences(const TensorPtr& mu,
                                            const std::vector<std::pair<double, double>>& coords,
                                            int k, int seq_len = 5);

ReferenceDatabase build_reference_db(const TensorPtr& mu,
                                     const std::vector<std::pair<double, double>>& coords,
                                     int k, int seq_len = 5);

// Frobenius cosine: sum_ij A_ij B_ij / (||A||_F ||B||_F), in [-1,1].
// An all-zero sequence has no direction and is an error.
double cosine_similarity_seq(const LatentSequence& a, const LatentSequence& b);

struct LocalizeResult {
    double x_m = 0.0;
    double y_m = 0.0;
    double similarity = -2.0;
    int index = -1;
};

// Exhaustive scan; ties go to the lowest index.
LocalizeResult localize(const LatentSequence& query, const ReferenceDatabase& db);

struct LocalizationReport {
    std::vector<double> errors_m;                          // one per query
    std::vector<std::pair<double, double>> frac_below;     // threshold -> fraction
    std::vector<std::array<double, 3>> histogram;          // {bin_lo, bin_hi, count}

    std::string thresholds_csv() const;  // "threshold_m,fraction"
    std::string histogram_csv() const;   // "bin_lo_m,bin_hi_m,count"
};

// Error is the Euclidean distance between the best match's coordinate and
// the query's own ground-truth coordinate. Thresholds 0.25/0.5/1/2 m,
// histogram bins 0.25 m wide.
LocalizationReport localization_report(const std::vector<LatentSequence>& queries,
                                       const ReferenceDatabase& db);

}  // namespace evpr
