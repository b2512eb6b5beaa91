#include "gridbid/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numbers>

namespace gridbid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt3 = std::numbers::sqrt3;

}  // namespace

double normal_cdf(double z) {
    if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_pdf(double z) {
    if (std::isinf(z)) return 0.0;
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

std::string to_string(DistKind kind) {
    switch (kind) {
        case DistKind::PointMass: return "point_mass";
        case DistKind::Gaussian: return "gaussian";
        case DistKind::BoundedUniform: return "bounded_uniform";
        case DistKind::TwoPoint: return "two_point";
        case DistKind::Empirical: return "empirical";
    }
    return "unknown";
}

void PriceDistribution::check_valid() const {
    if (!std::isfinite(mu_)) throw ConfigError("distribution mean must be finite");
    if (!std::isfinite(sigma_) || sigma_ < 0.0)
        throw ConfigError(fmt::format("distribution deviation must be >= 0, got {}", sigma_));
    if (kind_ == DistKind::TwoPoint) {
        if (!(alpha_ > 0.0 && alpha_ < 1.0))
            throw ConfigError(fmt::format("two-point probability must lie in (0, 1), got {}", alpha_));
        if (!(pi_ >= gamma_))
            throw ConfigError("two-point model requires pi >= gamma");
    }
    if (kind_ == DistKind::Empirical && samples_.empty())
        throw ConfigError("empirical distribution needs at least one sample");
    if (bounds_) bounds_->validate();
}

PriceDistribution PriceDistribution::point_mass(double mu) {
    PriceDistribution d;
    d.kind_ = DistKind::PointMass;
    d.mu_ = mu;
    d.check_valid();
    return d;
}

PriceDistribution PriceDistribution::gaussian(double mu, double sigma) {
    PriceDistribution d;
    d.kind_ = DistKind::Gaussian;
    d.mu_ = mu;
    d.sigma_ = sigma;
    d.check_valid();
    return d;
}

PriceDistribution PriceDistribution::bounded_uniform(double mu, double sigma) {
    PriceDistribution d;
    d.kind_ = DistKind::BoundedUniform;
    d.mu_ = mu;
    d.sigma_ = sigma;
    d.check_valid();
    return d;
}

PriceDistribution PriceDistribution::two_point(double pi, double gamma, double alpha) {
    PriceDistribution d;
    d.kind_ = DistKind::TwoPoint;
    d.pi_ = pi;
    d.gamma_ = gamma;
    d.alpha_ = alpha;
    d.mu_ = alpha * pi + (1.0 - alpha) * gamma;
    double beta = 1.0 - alpha;
    d.sigma_ = std::sqrt(alpha * beta) * (pi - gamma);
    d.check_valid();
    return d;
}

PriceDistribution PriceDistribution::empirical(std::vector<double> samples) {
    PriceDistribution d;
    d.kind_ = DistKind::Empirical;
    d.samples_ = std::move(samples);
    std::sort(d.samples_.begin(), d.samples_.end());
    d.check_valid();
    double sum = 0.0;
    for (double s : d.samples_) sum += s;
    d.mu_ = sum / static_cast<double>(d.samples_.size());
    double var = 0.0;
    for (double s : d.samples_) var += (s - d.mu_) * (s - d.mu_);
    d.sigma_ = std::sqrt(var / static_cast<double>(d.samples_.size()));
    return d;
}

PriceDistribution PriceDistribution::truncate_normalize(PriceBounds bounds) const {
    bounds.validate();
    PriceDistribution d = *this;
    d.bounds_ = bounds;
    switch (kind_) {
        case DistKind::PointMass:
            if (!bounds.contains(mu_))
                throw InfeasibleError(fmt::format(
                    "point mass at {} has no support inside [{}, {}]", mu_, bounds.floor, bounds.cap));
            break;
        case DistKind::Gaussian: {
            if (sigma_ == 0.0) {
                if (!bounds.contains(mu_))
                    throw InfeasibleError("degenerate gaussian lies outside the price bounds");
                break;
            }
            double z = normal_cdf((bounds.cap - mu_) / sigma_) - normal_cdf((bounds.floor - mu_) / sigma_);
            if (z <= 0.0)
                throw InfeasibleError(fmt::format(
                    "gaussian({}, {}) has no mass inside [{}, {}]", mu_, sigma_, bounds.floor, bounds.cap));
            break;
        }
        case DistKind::BoundedUniform: {
            double lo = std::max(mu_ - kSqrt3 * sigma_, bounds.floor);
            double hi = std::min(mu_ + kSqrt3 * sigma_, bounds.cap);
            if (lo > hi)
                throw InfeasibleError("uniform support does not intersect the price bounds");
            break;
        }
        case DistKind::TwoPoint:
            if (!bounds.contains(pi_) && !bounds.contains(gamma_))
                throw InfeasibleError("both two-point realizations lie outside the price bounds");
            break;
        case DistKind::Empirical: {
            bool any = std::any_of(samples_.begin(), samples_.end(),
                                   [&](double s) { return bounds.contains(s); });
            if (!any) throw InfeasibleError("no empirical samples inside the price bounds");
            break;
        }
    }
    return d;
}

bool PriceDistribution::is_discrete() const {
    switch (kind_) {
        case DistKind::PointMass:
        case DistKind::TwoPoint:
        case DistKind::Empirical:
            return true;
        case DistKind::Gaussian:
            return sigma_ == 0.0;
        case DistKind::BoundedUniform:
            return sigma_ == 0.0 || support_hi() <= support_lo();
    }
    return false;
}

std::vector<Atom> PriceDistribution::atoms() const {
    switch (kind_) {
        case DistKind::PointMass:
        case DistKind::Gaussian:
            return {{mu_, 1.0}};
        case DistKind::BoundedUniform:
            return {{mean(), 1.0}};
        case DistKind::TwoPoint: {
            bool keep_pi = !bounds_ || bounds_->contains(pi_);
            bool keep_gamma = !bounds_ || bounds_->contains(gamma_);
            if (keep_pi && keep_gamma) return {{gamma_, 1.0 - alpha_}, {pi_, alpha_}};
            if (keep_pi) return {{pi_, 1.0}};
            return {{gamma_, 1.0}};
        }
        case DistKind::Empirical: {
            std::vector<Atom> out;
            double n = 0.0;
            for (double s : samples_)
                if (!bounds_ || bounds_->contains(s)) n += 1.0;
            double w = 1.0 / n;
            for (double s : samples_) {
                if (bounds_ && !bounds_->contains(s)) continue;
                if (!out.empty() && out.back().value == s)
                    out.back().weight += w;
                else
                    out.push_back({s, w});
            }
            return out;
        }
    }
    return {};
}

double PriceDistribution::support_lo() const {
    double lo;
    switch (kind_) {
        case DistKind::PointMass: lo = mu_; break;
        case DistKind::Gaussian: lo = sigma_ == 0.0 ? mu_ : -kInf; break;
        case DistKind::BoundedUniform: lo = mu_ - kSqrt3 * sigma_; break;
        case DistKind::TwoPoint: lo = gamma_; break;
        case DistKind::Empirical: lo = samples_.front(); break;
        default: lo = -kInf;
    }
    if (bounds_) lo = std::max(lo, bounds_->floor);
    return lo;
}

double PriceDistribution::support_hi() const {
    double hi;
    switch (kind_) {
        case DistKind::PointMass: hi = mu_; break;
        case DistKind::Gaussian: hi = sigma_ == 0.0 ? mu_ : kInf; break;
        case DistKind::BoundedUniform: hi = mu_ + kSqrt3 * sigma_; break;
        case DistKind::TwoPoint: hi = pi_; break;
        case DistKind::Empirical: hi = samples_.back(); break;
        default: hi = kInf;
    }
    if (bounds_) hi = std::min(hi, bounds_->cap);
    return hi;
}

SegmentMoments PriceDistribution::segment_moments(double lo, double hi) const {
    if (hi <= lo) return {};
    switch (kind_) {
        case DistKind::Gaussian: {
            if (sigma_ == 0.0) {
                if (mu_ > lo && mu_ <= hi && (!bounds_ || bounds_->contains(mu_))) return {1.0, mu_};
                return {};
            }
            double f = bounds_ ? bounds_->floor : -kInf;
            double c = bounds_ ? bounds_->cap : kInf;
            double z = 1.0;
            if (bounds_)
                z = normal_cdf((c - mu_) / sigma_) - normal_cdf((f - mu_) / sigma_);
            double a = (std::max(lo, f) - mu_) / sigma_;
            double b = (std::min(hi, c) - mu_) / sigma_;
            if (b <= a) return {};
            double mass = normal_cdf(b) - normal_cdf(a);
            double first = mu_ * mass + sigma_ * (normal_pdf(a) - normal_pdf(b));
            return {mass / z, first / z};
        }
        case DistKind::BoundedUniform: {
            double u_lo = support_lo();
            double u_hi = support_hi();
            if (u_hi <= u_lo) {  // support collapsed to a single point
                double m = 0.5 * (u_lo + u_hi);
                if (m > lo && m <= hi) return {1.0, m};
                return {};
            }
            double l = std::max(lo, u_lo);
            double h = std::min(hi, u_hi);
            if (h <= l) return {};
            double density = 1.0 / (u_hi - u_lo);
            return {(h - l) * density, 0.5 * (h * h - l * l) * density};
        }
        default: {
            SegmentMoments m;
            for (const Atom& a : atoms()) {
                if (a.value > lo && a.value <= hi) {
                    m.mass += a.weight;
                    m.first += a.weight * a.value;
                }
            }
            return m;
        }
    }
}

double PriceDistribution::mean() const {
    SegmentMoments m = segment_moments(-kInf, kInf);
    return m.first / m.mass;
}

double PriceDistribution::stddev() const {
    switch (kind_) {
        case DistKind::PointMass:
            return 0.0;
        case DistKind::Gaussian: {
            if (!bounds_ || sigma_ == 0.0) return sigma_;
            double a = (bounds_->floor - mu_) / sigma_;
            double b = (bounds_->cap - mu_) / sigma_;
            double z = normal_cdf(b) - normal_cdf(a);
            double pa = normal_pdf(a), pb = normal_pdf(b);
            double ratio = (pa - pb) / z;
            double a_term = std::isinf(a) ? 0.0 : a * pa;
            double b_term = std::isinf(b) ? 0.0 : b * pb;
            double var = 1.0 + (a_term - b_term) / z - ratio * ratio;
            return sigma_ * std::sqrt(std::max(0.0, var));
        }
        case DistKind::BoundedUniform:
            return (support_hi() - support_lo()) / std::sqrt(12.0);
        case DistKind::TwoPoint:
        case DistKind::Empirical: {
            double m = mean();
            double var = 0.0;
            for (const Atom& a : atoms()) var += a.weight * (a.value - m) * (a.value - m);
            return std::sqrt(var);
        }
    }
    return 0.0;
}

double PriceDistribution::sample(Rng& rng) const {
    switch (kind_) {
        case DistKind::PointMass:
            return mu_;
        case DistKind::Gaussian: {
            if (sigma_ == 0.0) return mu_;
            if (!bounds_) return mu_ + sigma_ * rng.normal();
            for (int i = 0; i < 1'000'000; ++i) {
                double x = mu_ + sigma_ * rng.normal();
                if (bounds_->contains(x)) return x;
            }
            throw NumericError("truncated gaussian rejection sampling failed to accept");
        }
        case DistKind::BoundedUniform: {
            double lo = support_lo(), hi = support_hi();
            return hi <= lo ? mean() : rng.uniform(lo, hi);
        }
        case DistKind::TwoPoint:
        case DistKind::Empirical: {
            auto as = atoms();
            if (as.size() == 1) return as[0].value;
            if (kind_ == DistKind::TwoPoint) return rng.uniform() < as[1].weight ? as[1].value : as[0].value;
            // equal-weight empirical atoms may have merged duplicates; sample by CDF
            double u = rng.uniform();
            double acc = 0.0;
            for (const Atom& a : as) {
                acc += a.weight;
                if (u < acc) return a.value;
            }
            return as.back().value;
        }
    }
    return mu_;
}

std::vector<double> PriceDistribution::sample_n(std::uint64_t seed, std::size_t n) const {
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& x : out) x = sample(rng);
    return out;
}

double mean_of(const PriceDistribution& dist) { return dist.mean(); }

PriceDistribution truncate_normalize(const PriceDistribution& dist, PriceBounds bounds) {
    return dist.truncate_normalize(bounds);
}

std::vector<double> sample(const PriceDistribution& dist, std::uint64_t seed, std::size_t n) {
    if (n == 0) throw ConfigError("sample count must be >= 1");
    return dist.sample_n(seed, n);
}

}  // namespace gridbid
