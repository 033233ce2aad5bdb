#include "smelab/core/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace smelab {

double pairwise_sum(std::span<const double> values) {
    constexpr std::size_t kLeaf = 16;
    if (values.size() <= kLeaf) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double mean(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mean of empty sample");
    return pairwise_sum(values) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
    if (values.size() < 2) throw std::invalid_argument("variance needs at least two values");
    const double m = mean(values);
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - m) * (values[i] - m);
    return pairwise_sum(sq) / static_cast<double>(values.size() - 1);
}

MeanEstimate iid_mean(std::span<const double> values) {
    MeanEstimate out;
    out.count = values.size();
    out.mean = mean(values);
    out.std_error = values.size() > 1
                        ? std::sqrt(sample_variance(values) / static_cast<double>(values.size()))
                        : 0.0;
    return out;
}

MeanEstimate batch_means(std::span<const double> values, std::size_t batches) {
    const std::size_t n = values.size();
    if (batches < 2 || n < 2 * batches) return iid_mean(values);
    MeanEstimate out;
    out.count = n;
    out.mean = mean(values);
    std::vector<double> means(batches);
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t lo = b * n / batches;
        const std::size_t hi = (b + 1) * n / batches;
        means[b] = mean(values.subspan(lo, hi - lo));
    }
    out.std_error = std::sqrt(sample_variance(means) / static_cast<double>(batches));
    return out;
}

CovarianceEstimate sample_covariance(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("covariance needs two equally sized samples of length >= 2");
    const std::size_t n = x.size();
    const double mx = mean(x), my = mean(y);
    std::vector<double> prod(n);
    for (std::size_t k = 0; k < n; ++k) prod[k] = (x[k] - mx) * (y[k] - my);
    CovarianceEstimate out;
    out.count = n;
    out.cov = pairwise_sum(prod) / static_cast<double>(n - 1);
    out.std_error = std::sqrt(sample_variance(prod) / static_cast<double>(n));
    return out;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("least_squares needs two equally sized samples of length >= 2");
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("least_squares: degenerate abscissae");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

}  // namespace smelab
