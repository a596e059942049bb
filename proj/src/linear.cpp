#include <algorithm>
#include <cmath>
#include <numeric>

#include "stylo/error.hpp"
#include "stylo/model.hpp"
#include "stylo/rng.hpp"

namespace stylo {

namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// In-place Cholesky of a symmetric positive definite row-major matrix; the
// lower triangle holds L afterwards and the upper triangle is zeroed.
bool cholesky(std::vector<double>& a, std::size_t d) {
    for (std::size_t j = 0; j < d; ++j) {
        double diag = a[j * d + j];
        for (std::size_t k = 0; k < j; ++k) diag -= a[j * d + k] * a[j * d + k];
        if (!(diag > 0.0)) return false;
        const double ljj = std::sqrt(diag);
        a[j * d + j] = ljj;
        for (std::size_t i = j + 1; i < d; ++i) {
            double s = a[i * d + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * d + k] * a[j * d + k];
            a[i * d + j] = s / ljj;
        }
        for (std::size_t i = 0; i < j; ++i) a[i * d + j] = 0.0;
    }
    return true;
}

// Solves (L L^T) x = b.
std::vector<double> cholesky_solve(const std::vector<double>& l, std::size_t d, std::vector<double> b) {
    for (std::size_t i = 0; i < d; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l[i * d + k] * b[k];
        b[i] = s / l[i * d + i];
    }
    for (std::size_t i = d; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < d; ++k) s -= l[k * d + i] * b[k];
        b[i] = s / l[i * d + i];
    }
    return b;
}

}  // namespace

double LinearModel::decision(std::span<const double> x) const { return dot(weights, x) + intercept; }

LinearModel train_lda(const Dataset& z, const LdaParams& params) {
    const std::size_t d = z.cols;
    const std::size_t n = z.rows;
    std::vector<double> mean[2] = {std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    std::size_t count[2] = {0, 0};
    for (std::size_t r = 0; r < n; ++r) {
        const int y = z.labels[r];
        ++count[y];
        for (std::size_t c = 0; c < d; ++c) mean[y][c] += z.at(r, c);
    }
    for (int y = 0; y < 2; ++y) {
        for (double& m : mean[y]) m /= static_cast<double>(count[y]);
    }
    std::vector<double> cov(d * d, 0.0);
    std::vector<double> centered(d);
    for (std::size_t r = 0; r < n; ++r) {
        const auto& mu = mean[z.labels[r]];
        for (std::size_t c = 0; c < d; ++c) centered[c] = z.at(r, c) - mu[c];
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j <= i; ++j) cov[i * d + j] += centered[i] * centered[j];
        }
    }
    const double denom = n > 2 ? static_cast<double>(n - 2) : 1.0;
    double trace = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            cov[i * d + j] /= denom;
            cov[j * d + i] = cov[i * d + j];
        }
        trace += cov[i * d + i];
    }
    const double target = trace > 0.0 ? trace / static_cast<double>(d) : 1.0;
    const double gamma = params.shrinkage;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            cov[i * d + j] = (1.0 - gamma) * cov[i * d + j] + (i == j ? gamma * target : 0.0);
        }
    }
    if (!cholesky(cov, d)) throw RuntimeFailure("LDA: shrunk covariance is not positive definite");

    std::vector<double> diff(d);
    for (std::size_t c = 0; c < d; ++c) diff[c] = mean[1][c] - mean[0][c];
    LinearModel model;
    model.weights = cholesky_solve(cov, d, diff);
    double mid = 0.0;
    for (std::size_t c = 0; c < d; ++c) mid += 0.5 * (mean[1][c] + mean[0][c]) * model.weights[c];
    model.intercept = -mid + std::log(static_cast<double>(count[1]) / static_cast<double>(count[0]));
    model.mean_human = std::move(mean[0]);
    model.mean_generated = std::move(mean[1]);
    model.covariance_cholesky = std::move(cov);
    return model;
}

LinearModel train_logreg(const Dataset& z, const LogRegParams& params, TrainingMeta* meta) {
    const std::size_t d = z.cols;
    const std::size_t n = z.rows;
    const double inv_n = 1.0 / static_cast<double>(n);
    const double inv_c = 1.0 / params.c;
    std::vector<double> sign(n);
    for (std::size_t r = 0; r < n; ++r) sign[r] = z.labels[r] == 1 ? 1.0 : -1.0;

    // theta = (w_0..w_{d-1}, b)
    auto objective = [&](const std::vector<double>& theta) {
        double loss = 0.0;
        const std::span<const double> w(theta.data(), d);
        for (std::size_t r = 0; r < n; ++r) loss += softplus(-sign[r] * (dot(w, z.row(r)) + theta[d]));
        return inv_n * (loss + 0.5 * inv_c * dot(w, w));
    };
    auto gradient = [&](const std::vector<double>& theta, std::vector<double>& g) {
        std::fill(g.begin(), g.end(), 0.0);
        const std::span<const double> w(theta.data(), d);
        for (std::size_t r = 0; r < n; ++r) {
            const double m = sign[r] * (dot(w, z.row(r)) + theta[d]);
            const double coef = -sign[r] / (1.0 + std::exp(m));
            const auto x = z.row(r);
            for (std::size_t c = 0; c < d; ++c) g[c] += coef * x[c];
            g[d] += coef;
        }
        for (std::size_t c = 0; c < d; ++c) g[c] = inv_n * (g[c] + inv_c * theta[c]);
        g[d] *= inv_n;
    };

    std::vector<double> theta(d + 1, 0.0), grad(d + 1), prev_theta, prev_grad, candidate(d + 1);
    double loss = objective(theta);
    std::vector<double> history{loss};
    double step = 1.0;
    double grad_norm = 0.0;
    int iter = 0;
    for (; iter < params.max_iter; ++iter) {
        gradient(theta, grad);
        grad_norm = std::sqrt(dot(grad, grad));
        if (grad_norm < params.tol) break;
        if (iter > 0) {
            // Barzilai-Borwein initial step, then Armijo backtracking.
            double sy = 0.0, ss = 0.0;
            for (std::size_t i = 0; i <= d; ++i) {
                const double s = theta[i] - prev_theta[i];
                sy += s * (grad[i] - prev_grad[i]);
                ss += s * s;
            }
            step = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : step * 2.0;
        }
        const double g2 = grad_norm * grad_norm;
        double next_loss = 0.0;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t i = 0; i <= d; ++i) candidate[i] = theta[i] - step * grad[i];
            next_loss = objective(candidate);
            if (!std::isfinite(next_loss)) {
                step *= 0.5;
                continue;
            }
            if (next_loss <= loss - 1e-4 * step * g2) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no further decrease representable
        prev_theta = theta;
        prev_grad = grad;
        theta = candidate;
        loss = next_loss;
        if (!std::isfinite(loss)) {
            throw RuntimeFailure("logistic regression: non-finite loss at iteration " + std::to_string(iter));
        }
        history.push_back(loss);
    }
    if (iter == params.max_iter) {
        gradient(theta, grad);
        grad_norm = std::sqrt(dot(grad, grad));
    }
    if (meta != nullptr) {
        meta->rounds_run = iter;
        meta->final_loss = loss;
        meta->final_gradient_norm = grad_norm;
        meta->loss_history = std::move(history);
    }
    LinearModel model;
    model.weights.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(d));
    model.intercept = theta[d];
    return model;
}

LinearModel train_linear_svc(const Dataset& z, const SvcParams& params, std::uint64_t seed, TrainingMeta* meta) {
    // Pegasos on the primal (lambda/2)|w|^2 + mean hinge, with the bias as an
    // extra constant-1 feature. The returned weights are the average iterate
    // of the final epoch.
    const std::size_t d = z.cols;
    const std::size_t n = z.rows;
    const double lambda = 1.0 / (params.c * static_cast<double>(n));
    const double radius = 1.0 / std::sqrt(lambda);
    std::vector<double> w(d + 1, 0.0), avg(d + 1, 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    std::uint64_t t = 0;
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        rng.shuffle(order);
        const bool last = epoch + 1 == params.epochs;
        for (std::size_t i : order) {
            ++t;
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const double y = z.labels[i] == 1 ? 1.0 : -1.0;
            const auto x = z.row(i);
            const double margin = y * (dot(std::span<const double>(w.data(), d), x) + w[d]);
            const double shrink = 1.0 - 1.0 / static_cast<double>(t);
            for (double& v : w) v *= shrink;
            if (margin < 1.0) {
                for (std::size_t c = 0; c < d; ++c) w[c] += eta * y * x[c];
                w[d] += eta * y;
            }
            const double norm = std::sqrt(dot(w, w));
            if (norm > radius) {
                const double s = radius / norm;
                for (double& v : w) v *= s;
            }
            if (last) {
                for (std::size_t c = 0; c <= d; ++c) avg[c] += w[c];
            }
        }
    }
    for (double& v : avg) v /= static_cast<double>(n);

    LinearModel model;
    model.weights.assign(avg.begin(), avg.begin() + static_cast<std::ptrdiff_t>(d));
    model.intercept = avg[d];
    if (meta != nullptr) {
        double hinge = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double y = z.labels[r] == 1 ? 1.0 : -1.0;
            hinge += std::max(0.0, 1.0 - y * model.decision(z.row(r)));
        }
        meta->rounds_run = params.epochs;
        meta->final_loss = 0.5 * lambda * dot(avg, avg) + hinge / static_cast<double>(n);
    }
    return model;
}

}  // namespace stylo
