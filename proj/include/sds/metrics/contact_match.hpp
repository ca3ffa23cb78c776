#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "sds/errors.hpp"
#include "sds/gait.hpp"
#include "sds/geometry.hpp"

namespace sds {

struct MatchReport {
    double percent = 0.0;             // 100 * mean per-timestep agreement at best shift
    double best_shift = 0.0;          // cycle fraction in [0,1)
    std::array<double, 4> per_leg{};  // per-leg agreement in [0,1]
    double frequency = 0.0;           // estimated gait frequency, Hz
    bool periodic = false;            // false when no dominant period exists
};

namespace detail {

struct ContactBits {
    std::array<std::vector<std::uint8_t>, 4> legs;
    std::size_t length = 0;
    double dt = 0.02;
};

inline ContactBits to_bits(const ContactSequence& seq) {
    ContactBits bits;
    bits.legs = seq.legs;
    bits.length = seq.length();
    bits.dt = seq.dt;
    return bits;
}

/// Mean-removed per-leg autocorrelation, summed over legs. The raw summed
/// contact signal is constant for duty-0.5 two-beat gaits, so correlating
/// per leg keeps the period visible at every duty.
inline std::vector<double> contact_autocorrelation(const ContactBits& bits) {
    const std::size_t T = bits.length;
    std::vector<double> r(T / 2 + 1, 0.0);
    std::array<double, 4> mean{};
    for (int i = 0; i < 4; ++i) {
        double m = 0.0;
        for (std::size_t k = 0; k < T; ++k) m += bits.legs[i][k];
        mean[i] = m / static_cast<double>(T);
    }
    for (std::size_t lag = 1; lag < r.size(); ++lag) {
        double acc = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double m = mean[i];
            const std::vector<std::uint8_t>& leg = bits.legs[i];
            for (std::size_t k = 0; k + lag < T; ++k)
                acc += (leg[k] - m) * (leg[k + lag] - m);
        }
        r[lag] = acc;
    }
    return r;
}

/// Candidate period lags: the first dominant local maximum, the global
/// maximum, and the first peak's half/double harmonics.
inline std::vector<std::size_t> candidate_period_lags(const std::vector<double>& r) {
    std::vector<std::size_t> lags;
    if (r.size() < 4) return lags;
    double rmax = 0.0;
    std::size_t argmax = 0;
    for (std::size_t lag = 2; lag < r.size(); ++lag)
        if (r[lag] > rmax) {
            rmax = r[lag];
            argmax = lag;
        }
    if (rmax <= 1e-9) return lags;

    auto push_unique = [&](std::size_t lag) {
        if (lag < 2 || lag >= r.size() || lags.size() >= 4) return;
        for (std::size_t l : lags)
            if (l == lag) return;
        lags.push_back(lag);
    };
    for (std::size_t lag = 2; lag + 1 < r.size(); ++lag) {
        if (r[lag] >= 0.9 * rmax && r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1]) {
            push_unique(lag);  // first dominant peak
            break;
        }
    }
    push_unique(argmax);
    if (!lags.empty()) {
        const std::size_t first = lags.front();
        push_unique(first / 2);
        push_unique(first * 2);
    }
    return lags;
}

/// One agreement arc per sample: the set of circular shifts under which the
/// regenerated template bit equals the observed bit.
template <typename Emit>
inline void for_each_agreement_arc(const ContactBits& bits,
                                   const std::array<double, 4>& tmpl_phase, double f,
                                   double duty, Emit&& emit) {
    const std::size_t T = bits.length;
    for (int i = 0; i < 4; ++i) {
        const double phase = tmpl_phase[i];
        const std::vector<std::uint8_t>& leg = bits.legs[i];
        for (std::size_t k = 0; k < T; ++k) {
            const double a = fract(f * (static_cast<double>(k) * bits.dt) + phase);
            const double s1 = fract(-a);          // arc start where bit becomes 1
            const double e1 = fract(duty - a);    // arc end
            if (leg[k])
                emit(s1, e1);
            else
                emit(e1, s1);
        }
    }
}

/// Coarse agreement maximization over the shift via a binned coverage
/// histogram; exact enough to rank frequency candidates.
inline std::pair<double, double> histogram_best_shift(const ContactBits& bits,
                                                      const std::array<double, 4>& tmpl_phase,
                                                      double f, double duty) {
    constexpr int kBins = 512;
    std::array<std::int32_t, kBins + 1> diff{};
    auto bin_of = [](double x) {
        int b = static_cast<int>(x * kBins);
        return std::clamp(b, 0, kBins - 1);
    };
    for_each_agreement_arc(bits, tmpl_phase, f, duty, [&](double s, double e) {
        const int bs = bin_of(s);
        const int be = bin_of(e);
        if (s < e) {
            diff[bs] += 1;
            diff[be] -= 1;
        } else {  // wraps through zero
            diff[0] += 1;
            diff[be] -= 1;
            diff[bs] += 1;
            diff[kBins] -= 1;
        }
    });
    int best_bin = 0;
    std::int64_t best = -1;
    std::int64_t running = 0;
    for (int b = 0; b < kBins; ++b) {
        running += diff[b];
        if (running > best) {
            best = running;
            best_bin = b;
        }
    }
    const double total = static_cast<double>(4 * bits.length);
    return {static_cast<double>(best) / total, (best_bin + 0.5) / kBins};
}

struct SweepResult {
    double agreement = -1.0;  // fraction of agreeing samples
    double shift = 0.0;       // plateau midpoint, in [0,1)
};

/// Exact maximization of sample agreement over the circular shift at fixed
/// frequency and duty, via an event sweep over arc endpoints.
inline SweepResult sweep_best_shift(const ContactBits& bits,
                                    const std::array<double, 4>& tmpl_phase, double f,
                                    double duty) {
    std::vector<std::pair<double, int>> events;
    events.reserve(8 * bits.length + 4);
    for_each_agreement_arc(bits, tmpl_phase, f, duty, [&](double s, double e) {
        if (s < e) {
            events.push_back({s, +1});
            events.push_back({e, -1});
        } else {
            events.push_back({0.0, +1});
            events.push_back({e, -1});
            events.push_back({s, +1});
            events.push_back({1.0, -1});
        }
    });
    std::sort(events.begin(), events.end());

    SweepResult best;
    const double total = static_cast<double>(4 * bits.length);
    double count = 0.0;
    double pos = 0.0;
    std::size_t idx = 0;
    while (idx < events.size()) {
        const double at = events[idx].first;
        if (at > pos && count > best.agreement * total) {
            best.agreement = count / total;
            best.shift = 0.5 * (pos + at);
        }
        while (idx < events.size() && events[idx].first == at) {
            count += events[idx].second;
            ++idx;
        }
        pos = at;
    }
    if (pos < 1.0 && count > best.agreement * total) {
        best.agreement = count / total;
        best.shift = fract(0.5 * (pos + 1.0));
    }
    return best;
}

/// Agreement of the observed bits against the regenerated template
/// sequence at (f, shift, duty); optionally fills per-leg agreement.
inline double direct_agreement(const ContactBits& bits, const std::array<double, 4>& tmpl_phase,
                               double f, double shift, double duty,
                               std::array<double, 4>* per_leg) {
    const std::size_t T = bits.length;
    std::size_t agree_total = 0;
    for (int i = 0; i < 4; ++i) {
        std::size_t agree = 0;
        for (std::size_t k = 0; k < T; ++k) {
            const bool g =
                fract(f * (static_cast<double>(k) * bits.dt) + tmpl_phase[i] + shift) < duty;
            if (g == (bits.legs[i][k] != 0)) ++agree;
        }
        if (per_leg) (*per_leg)[i] = static_cast<double>(agree) / static_cast<double>(T);
        agree_total += agree;
    }
    return static_cast<double>(agree_total) / static_cast<double>(4 * T);
}

struct ExactFit {
    bool feasible = false;
    double f = 0.0;
    double shift = 0.0;
    double duty = 0.0;
};

/// Tries to reproduce the observed bits exactly as a sampled template
/// pattern. Near (f0, shift0) each sample's cycle index is unambiguous,
/// which turns "some (f, shift, duty) regenerates every bit" into a set of
/// linear inequalities: per sample, x = f*t_k + phase_i + shift - m_ik
/// must land in [0, duty) for stance and [duty, 1) for swing. With the
/// wraps m fixed, the worst-case margins are concave piecewise-linear in
/// f, so a ternary search either exhibits a feasible point or the fit is
/// impossible near f0.
inline ExactFit exact_template_fit(const ContactBits& bits,
                                   const std::array<double, 4>& tmpl_phase, double f0,
                                   double shift0, double duty0, double f_halfwidth) {
    const std::size_t T = bits.length;
    ExactFit fit;

    double f_center = f0;
    for (int round = 0; round < 3 && !fit.feasible; ++round) {
        std::vector<double> coeff;  // x_n(f) = coeff_n * f + cons_n (+ shift)
        std::vector<double> cons;
        std::vector<std::uint8_t> is_stance;
        coeff.reserve(4 * T);
        cons.reserve(4 * T);
        is_stance.reserve(4 * T);
        for (int i = 0; i < 4; ++i) {
            for (std::size_t k = 0; k < T; ++k) {
                const double t = static_cast<double>(k) * bits.dt;
                const double u = f_center * t + tmpl_phase[i] + shift0;
                const bool stance = bits.legs[i][k] != 0;
                const double mid = stance ? 0.5 * duty0 : 0.5 * (1.0 + duty0);
                const double m = std::floor(u - mid + 0.5);
                coeff.push_back(t);
                cons.push_back(tmpl_phase[i] + shift0 - m);
                is_stance.push_back(stance ? 1 : 0);
            }
        }

        struct Margins {
            double gap;     // min_swing - max_stance: room for the duty split
            double window;  // 1 - (max_swing - min_stance): room for the shift
            double min_stance;
            double max_stance;
            double min_swing;
        };
        auto margins = [&](double f) {
            Margins m{};
            double min_st = std::numeric_limits<double>::infinity();
            double max_st = -min_st;
            double min_sw = std::numeric_limits<double>::infinity();
            double max_sw = -min_sw;
            for (std::size_t n = 0; n < coeff.size(); ++n) {
                const double a = coeff[n] * f + cons[n];
                if (is_stance[n]) {
                    min_st = std::min(min_st, a);
                    max_st = std::max(max_st, a);
                } else {
                    min_sw = std::min(min_sw, a);
                    max_sw = std::max(max_sw, a);
                }
            }
            if (!std::isfinite(max_st) || !std::isfinite(max_sw)) {
                m.gap = m.window = -1.0;  // one class empty; no well-posed fit
                return m;
            }
            m.gap = min_sw - max_st;
            m.window = 1.0 + min_st - max_sw;
            m.min_stance = min_st;
            m.max_stance = max_st;
            m.min_swing = min_sw;
            return m;
        };
        auto g = [&](double f) {
            const Margins m = margins(f);
            return std::min(m.gap, m.window);
        };

        double lo = f_center - f_halfwidth;
        double hi = f_center + f_halfwidth;
        for (int it = 0; it < 140; ++it) {
            const double m1 = lo + (hi - lo) / 3.0;
            const double m2 = hi - (hi - lo) / 3.0;
            if (g(m1) < g(m2))
                lo = m1;
            else
                hi = m2;
        }
        const double f_star = 0.5 * (lo + hi);
        const Margins m = margins(f_star);
        if (std::min(m.gap, m.window) > 1e-11) {
            const double shift_rel = -m.min_stance + 0.5 * m.window;
            fit.feasible = true;
            fit.f = f_star;
            fit.shift = shift0 + shift_rel;
            fit.duty = std::clamp(
                0.5 * ((m.max_stance + shift_rel) + (m.min_swing + shift_rel)), 1e-9,
                1.0 - 1e-9);
        } else {
            f_center = f_star;  // retry wraps at the refined frequency
        }
    }
    return fit;
}

}  // namespace detail

/// Percent gait matching: the template's ideal boolean sequence is
/// regenerated at the sequence's own dt and nominal frequency (estimated
/// from the dominant contact period via autocorrelation), and agreement is
/// maximized over the circular phase shift. A local frequency/duty
/// refinement makes sequences that truly sample a template pattern score
/// exactly 100. Flat sequences report shift 0 against the template at a
/// 2 Hz default using the caller's duty.
inline MatchReport contact_match(const ContactSequence& seq, const GaitTemplate& tmpl,
                                 double duty) {
    require(seq.length() >= 2, Errc::InvalidInput, "contact sequence too short to match");
    require(duty > 0.0 && duty < 1.0, Errc::InvalidInput, "duty must lie in (0, 1)");
    const detail::ContactBits bits = detail::to_bits(seq);
    const std::size_t T = bits.length;

    double stance_frac = 0.0;
    for (int i = 0; i < 4; ++i)
        for (std::size_t k = 0; k < T; ++k) stance_frac += bits.legs[i][k];
    stance_frac /= static_cast<double>(4 * T);
    const double d_est = std::clamp(stance_frac, 0.02, 0.98);

    const std::vector<double> autocorr = detail::contact_autocorrelation(bits);
    const std::vector<std::size_t> lags = detail::candidate_period_lags(autocorr);

    MatchReport report;
    if (lags.empty()) {
        report.periodic = false;
        report.best_shift = 0.0;
        report.frequency = 2.0;
        report.percent =
            100.0 * detail::direct_agreement(bits, tmpl.phase, 2.0, 0.0, duty, &report.per_leg);
        return report;
    }
    report.periodic = true;

    // Stage 1: zoomed frequency grid; shift handled by the binned histogram.
    double best_f = 0.0;
    double best_agreement = -1.0;
    double final_step = 0.0;
    for (const std::size_t lag : lags) {
        double lo = 1.0 / ((static_cast<double>(lag) + 1.3) * bits.dt);
        double hi = 1.0 / ((static_cast<double>(lag) - 1.3) * bits.dt);
        lo = std::max(lo, 0.05);
        hi = std::min(hi, 0.5 / bits.dt);
        if (lo >= hi) continue;
        double stage_f = 0.0;
        double stage_agree = -1.0;
        double step = 0.0;
        for (int stage = 0; stage < 3; ++stage) {
            const int points = stage == 0 ? 160 : 40;
            step = (hi - lo) / points;
            for (int p = 0; p <= points; ++p) {
                const double f = lo + step * p;
                const auto [agree, shift] =
                    detail::histogram_best_shift(bits, tmpl.phase, f, d_est);
                (void)shift;
                if (agree > stage_agree) {
                    stage_agree = agree;
                    stage_f = f;
                }
            }
            lo = std::max(lo, stage_f - 2.0 * step);
            hi = std::min(hi, stage_f + 2.0 * step);
        }
        if (stage_agree > best_agreement) {
            best_agreement = stage_agree;
            best_f = stage_f;
            final_step = step;
        }
    }

    if (best_f <= 0.0) {
        report.periodic = false;
        report.best_shift = 0.0;
        report.frequency = 2.0;
        report.percent =
            100.0 * detail::direct_agreement(bits, tmpl.phase, 2.0, 0.0, duty, &report.per_leg);
        return report;
    }

    // Exact shift maximization at the winning frequency.
    const detail::SweepResult sweep = detail::sweep_best_shift(bits, tmpl.phase, best_f, d_est);

    // Stage 2: exact feasibility refinement around the grid optimum.
    const detail::ExactFit fit = detail::exact_template_fit(
        bits, tmpl.phase, best_f, sweep.shift, d_est, 3.0 * final_step + 1e-3);
    if (fit.feasible) {
        std::array<double, 4> per_leg{};
        const double agreement =
            detail::direct_agreement(bits, tmpl.phase, fit.f, fit.shift, fit.duty, &per_leg);
        if (agreement == 1.0) {
            report.percent = 100.0;
            report.best_shift = fract(fit.shift);
            report.per_leg = per_leg;
            report.frequency = fit.f;
            return report;
        }
    }

    report.frequency = best_f;
    report.best_shift = fract(sweep.shift);
    report.percent = 100.0 * detail::direct_agreement(bits, tmpl.phase, best_f, sweep.shift,
                                                      d_est, &report.per_leg);
    return report;
}

/// Label whose template matches best; margin is the percent gap to the
/// runner-up. Ties resolve in the fixed order trot, pace, bound, hop.
inline std::pair<GaitLabel, double> classify_gait(const ContactSequence& seq) {
    GaitLabel best_label = GaitLabel::Trot;
    double best = -1.0;
    double second = -1.0;
    for (const GaitLabel label : gait_labels()) {
        const GaitTemplate tmpl = reference_gait(label);
        const MatchReport report = contact_match(seq, tmpl, tmpl.duty);
        if (report.percent > best) {
            second = best;
            best = report.percent;
            best_label = label;
        } else if (report.percent > second) {
            second = report.percent;
        }
    }
    return {best_label, best - std::max(second, 0.0)};
}

}  // namespace sds
