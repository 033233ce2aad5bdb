#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace smelab {

// Pairwise (cascade) summation; result independent of how the input was produced.
double pairwise_sum(std::span<const double> values);

double mean(std::span<const double> values);

// Unbiased sample variance.
double sample_variance(std::span<const double> values);

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t count = 0;
};

// Mean with a batch-means standard error (contiguous batches of equal size).
MeanEstimate batch_means(std::span<const double> values, std::size_t batches = 32);

// Mean with the naive i.i.d. standard error sd/sqrt(n).
MeanEstimate iid_mean(std::span<const double> values);

struct CovarianceEstimate {
    double cov = 0.0;
    double std_error = 0.0;  // sd of the centered products / sqrt(n)
    std::size_t count = 0;
};

// Unbiased sample covariance of paired samples.
CovarianceEstimate sample_covariance(std::span<const double> x, std::span<const double> y);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Ordinary least squares y = slope * x + intercept.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace smelab
