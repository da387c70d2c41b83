#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <vector>

namespace growth::detail {

// Anderson mixing for z = G(z), fed with z and f = G(z) - z. Returns the
// damped step z + beta f whenever the extrapolated point is rejected by
// `valid`, the least-squares system is singular, or the residual grows.
class AndersonMixer {
public:
    using Vec = std::vector<double>;

    AndersonMixer(int memory, double beta, std::function<bool(const Vec&)> valid)
        : memory_(memory), beta_(beta), valid_(std::move(valid)) {}

    Vec next(const Vec& z, const Vec& f) {
        const std::size_t n = z.size();
        double norm = 0.0;
        for (double v : f) norm = std::max(norm, std::abs(v));
        if (norm > 2.0 * best_) reset();
        best_ = std::min(best_, norm);
        if (have_prev_ && memory_ > 0) {
            Vec dz(n), df(n);
            for (std::size_t i = 0; i < n; ++i) {
                dz[i] = z[i] - z_prev_[i];
                df[i] = f[i] - f_prev_[i];
            }
            dz_.push_back(std::move(dz));
            df_.push_back(std::move(df));
            if (static_cast<int>(dz_.size()) > memory_) {
                dz_.pop_front();
                df_.pop_front();
            }
        }
        z_prev_ = z;
        f_prev_ = f;
        have_prev_ = true;

        Vec plain(n);
        for (std::size_t i = 0; i < n; ++i) plain[i] = z[i] + beta_ * f[i];
        if (dz_.empty()) return plain;

        // Normal equations (dF^T dF) gamma = dF^T f, lightly regularized.
        const std::size_t m = dz_.size();
        std::vector<double> a(m * (m + 1), 0.0);
        auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * (m + 1) + c]; };
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t c = 0; c < m; ++c)
                for (std::size_t i = 0; i < n; ++i) at(r, c) += df_[r][i] * df_[c][i];
            for (std::size_t i = 0; i < n; ++i) at(r, m) += df_[r][i] * f[i];
        }
        double trace = 0.0;
        for (std::size_t r = 0; r < m; ++r) trace += at(r, r);
        for (std::size_t r = 0; r < m; ++r) at(r, r) += 1e-12 * trace + 1e-300;

        std::vector<double> gamma(m, 0.0);
        for (std::size_t c = 0; c < m; ++c) {
            std::size_t piv = c;
            for (std::size_t r = c + 1; r < m; ++r)
                if (std::abs(at(r, c)) > std::abs(at(piv, c))) piv = r;
            if (!(std::abs(at(piv, c)) > 0)) {
                reset();
                return plain;
            }
            for (std::size_t k = 0; k <= m; ++k) std::swap(at(c, k), at(piv, k));
            for (std::size_t r = c + 1; r < m; ++r) {
                const double s = at(r, c) / at(c, c);
                for (std::size_t k = c; k <= m; ++k) at(r, k) -= s * at(c, k);
            }
        }
        for (std::size_t c = m; c-- > 0;) {
            double v = at(c, m);
            for (std::size_t k = c + 1; k < m; ++k) v -= at(c, k) * gamma[k];
            gamma[c] = v / at(c, c);
        }

        Vec out = plain;
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t i = 0; i < n; ++i) out[i] -= gamma[j] * (dz_[j][i] + beta_ * df_[j][i]);
        bool ok = true;
        for (double v : out) ok = ok && std::isfinite(v);
        if (!ok || !valid_(out)) {
            reset();
            return plain;
        }
        return out;
    }

    // Plain damped steps from here on.
    void disable() {
        memory_ = 0;
        reset();
    }

    void reset() {
        dz_.clear();
        df_.clear();
        have_prev_ = false;
        best_ = std::numeric_limits<double>::infinity();
    }

private:
    int memory_;
    double beta_;
    std::function<bool(const Vec&)> valid_;
    std::deque<Vec> dz_, df_;
    Vec z_prev_, f_prev_;
    bool have_prev_ = false;
    double best_ = std::numeric_limits<double>::infinity();
};

}  // namespace growth::detail
