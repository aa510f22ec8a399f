#include "texlat/synthesis.hpp"

#include <cmath>
#include <deque>
#include <random>
#include <string>

#include "texlat/error.hpp"
#include "texlat/pss_evaluator.hpp"
#include "texlat/simd/kernels.hpp"

namespace texlat {
namespace {

constexpr double kWeightFloor = 1e-8;

void check_layout(const PssVector& v, const PssLayout& layout, const char* what) {
    if (!(v.params == layout.params()) || v.dim() != layout.dim()) {
        throw UsageError(std::string(what) + " has dimension " + std::to_string(v.dim()) + ", expected " +
                         std::to_string(layout.dim()));
    }
}

void check_weights(const GroupWeights& w) {
    bool any = false;
    for (double x : w) {
        if (!std::isfinite(x) || x < 0) throw UsageError("group weights must be finite and non-negative");
        any |= x > 0;
    }
    if (!any) throw UsageError("group weights are all zero");
}

// Distance and upstream 2 w_g (a - t) for the statistics already in stats.
double residual(const std::vector<double>& stats, const PssVector& target, const GroupWeights& w, const PssLayout& layout,
                std::vector<double>* upstream) {
    double total = 0.0;
    if (upstream) upstream->assign(stats.size(), 0.0);
    for (std::size_t g = 1; g <= kPssGroups; ++g) {
        const auto r = layout.group(g);
        double part = 0.0;
        for (std::size_t i = r.offset; i < r.offset + r.size; ++i) {
            const double diff = stats[i] - target.values[i];
            part += diff * diff;
            if (upstream) (*upstream)[i] = 2.0 * w[g - 1] * diff;
        }
        total += w[g - 1] * part;
    }
    return total;
}

class Objective {
public:
    Objective(std::size_t side, const PssVector& target, const GroupWeights& w)
        : eval_(side, target.params), target_(target), weights_(w) {}

    double value(const Image& img) { return residual(eval_.evaluate(img), target_, weights_, eval_.layout(), nullptr); }

    double value_and_gradient(const Image& img, Image& grad) {
        const double f = residual(eval_.evaluate(img), target_, weights_, eval_.layout(), &upstream_);
        grad = eval_.gradient(upstream_);
        return f;
    }

    // Gradient at the image of the most recent value() call.
    void last_gradient(Image& grad) {
        residual(eval_.statistics(), target_, weights_, eval_.layout(), &upstream_);
        grad = eval_.gradient(upstream_);
    }

private:
    PssEvaluator eval_;
    const PssVector& target_;
    GroupWeights weights_;
    std::vector<double> upstream_;
};

bool finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

} // namespace

void SynthesisConfig::validate() const {
    if (size == 0) throw UsageError("synthesis size must be positive");
    if (!(initial_step > 0) || !(shrink > 0 && shrink < 1) || !(armijo > 0 && armijo < 1))
        throw UsageError("invalid line-search parameters");
    if (history == 0) throw UsageError("L-BFGS history must be at least 1");
    if (weights) check_weights(*weights);
}

GroupWeights default_weights(const PssVector& target) {
    const PssLayout layout(target.params);
    check_layout(target, layout, "target");
    GroupWeights w{};
    for (std::size_t g = 1; g <= kPssGroups; ++g) {
        double sq = 0.0;
        for (double x : group_view(target, g)) sq += x * x;
        w[g - 1] = 1.0 / std::max(sq, kWeightFloor);
    }
    return w;
}

double pss_distance(const PssVector& a, const PssVector& b, const GroupWeights& weights) {
    const PssLayout layout(a.params);
    check_layout(a, layout, "first vector");
    check_layout(b, layout, "second vector");
    check_weights(weights);
    return residual(a.values, b, weights, layout, nullptr);
}

Image pss_gradient(const Image& img, const PssVector& target, const GroupWeights& weights) {
    if (!img.is_square()) throw UsageError("statistics need a square image");
    check_weights(weights);
    PssEvaluator eval(img.width(), target.params);
    check_layout(target, eval.layout(), "target");
    std::vector<double> upstream;
    residual(eval.evaluate(img), target, weights, eval.layout(), &upstream);
    Image g = eval.gradient(upstream);
    if (!finite(g.pixels())) throw NumericError("non-finite statistic gradient");
    return g;
}

Image initial_noise(const PssVector& target, const SynthesisConfig& cfg) {
    cfg.validate();
    const PssLayout layout(target.params);
    check_layout(target, layout, "target");
    validate_pyramid_input(cfg.size, target.params.pyramid());
    const double mu = target.values[layout.group(1).offset];
    const double var = target.values[layout.group(1).offset + 1];
    if (!std::isfinite(mu) || !std::isfinite(var)) throw NumericError("target pixel moments are not finite");
    const double sd = std::sqrt(std::max(var, 0.0));
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Image img(cfg.size, cfg.size);
    for (auto& v : img.pixels()) v = mu + sd * dist(rng);
    return img;
}

SynthesisResult synthesize(const PssVector& target, const SynthesisConfig& cfg) {
    return synthesize_from(initial_noise(target, cfg), target, cfg);
}

SynthesisResult synthesize_from(const Image& initial, const PssVector& target, const SynthesisConfig& cfg) {
    cfg.validate();
    if (!initial.is_square()) throw UsageError("synthesis needs a square image");
    const std::size_t side = initial.width();
    validate_pyramid_input(side, target.params.pyramid());
    const GroupWeights w = cfg.weights ? *cfg.weights : default_weights(target);
    check_weights(w);
    Objective objective(side, target, w);
    const auto& k = simd::kernels();
    const std::size_t n = initial.size();

    SynthesisResult out{initial, {}};
    Image grad;
    double f = objective.value_and_gradient(out.image, grad);
    if (!std::isfinite(f)) throw NumericError("initial statistic distance is not finite");
    out.trace.push_back(f);

    struct Pair {
        std::vector<double> s, y;
        double rho;
    };
    std::deque<Pair> memory;
    const double pixel_rms = std::sqrt(std::max(variance(initial.pixels()), 1e-12));

    std::vector<double> dir(n), alpha_buf;
    Image trial(side, side), trial_grad;
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        if (!finite(grad.pixels())) throw NumericError("non-finite gradient at iteration " + std::to_string(it));
        const double gnorm2 = k.dot(grad.pixels().data(), grad.pixels().data(), n);
        if (gnorm2 == 0.0) {
            out.trace.push_back(f);
            continue;
        }

        // Two-loop recursion for d = -H g.
        for (std::size_t i = 0; i < n; ++i) dir[i] = -grad.pixels()[i];
        alpha_buf.assign(memory.size(), 0.0);
        for (std::size_t m = memory.size(); m-- > 0;) {
            alpha_buf[m] = memory[m].rho * k.dot(memory[m].s.data(), dir.data(), n);
            k.axpy(-alpha_buf[m], memory[m].y.data(), dir.data(), n);
        }
        double step = 1.0;
        if (memory.empty()) {
            step = cfg.initial_step * pixel_rms * std::sqrt(static_cast<double>(n)) / std::sqrt(gnorm2);
        } else {
            const auto& last = memory.back();
            const double gamma = k.dot(last.s.data(), last.y.data(), n) / k.dot(last.y.data(), last.y.data(), n);
            for (auto& v : dir) v *= gamma;
        }
        for (std::size_t m = 0; m < memory.size(); ++m) {
            const double beta = memory[m].rho * k.dot(memory[m].y.data(), dir.data(), n);
            k.axpy(alpha_buf[m] - beta, memory[m].s.data(), dir.data(), n);
        }
        double slope = k.dot(grad.pixels().data(), dir.data(), n);
        if (!(slope < 0)) {
            memory.clear();
            for (std::size_t i = 0; i < n; ++i) dir[i] = -grad.pixels()[i];
            slope = -gnorm2;
            step = cfg.initial_step * pixel_rms * std::sqrt(static_cast<double>(n)) / std::sqrt(gnorm2);
        }

        bool accepted = false;
        double f_new = f;
        for (std::size_t b = 0; b <= cfg.max_backtracks; ++b, step *= cfg.shrink) {
            for (std::size_t i = 0; i < n; ++i) trial.pixels()[i] = out.image.pixels()[i] + step * dir[i];
            try {
                f_new = objective.value(trial);
            } catch (const NumericError&) {
                continue;
            }
            if (f_new <= f + cfg.armijo * step * slope) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            memory.clear();
            out.trace.push_back(f);
            continue;
        }
        objective.last_gradient(trial_grad);
        if (!finite(trial_grad.pixels())) throw NumericError("non-finite gradient at iteration " + std::to_string(it + 1));

        Pair p{std::vector<double>(n), std::vector<double>(n), 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            p.s[i] = trial.pixels()[i] - out.image.pixels()[i];
            p.y[i] = trial_grad.pixels()[i] - grad.pixels()[i];
        }
        const double sy = k.dot(p.s.data(), p.y.data(), n);
        if (sy > 1e-12 * std::sqrt(k.dot(p.s.data(), p.s.data(), n) * k.dot(p.y.data(), p.y.data(), n))) {
            p.rho = 1.0 / sy;
            memory.push_back(std::move(p));
            if (memory.size() > cfg.history) memory.pop_front();
        }
        std::swap(out.image, trial);
        std::swap(grad, trial_grad);
        f = f_new;
        out.trace.push_back(f);
    }
    return out;
}

} // namespace texlat
