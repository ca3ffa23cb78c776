#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sds/dsl/interpreter.hpp"
#include "sds/errors.hpp"
#include "sds/gait.hpp"
#include "sds/sim.hpp"

namespace sds {

struct ComponentStats {
    double mean = 0.0;
    double variance = 0.0;
};

struct CheckpointStats {
    int iteration = 0;
    double best_objective = 0.0;
    std::map<std::string, ComponentStats> components;  // raw (unweighted) values
};

struct WeightUpdate {
    std::string component;
    double old_weight = 0.0;
    double new_weight = 0.0;
    int iteration = 0;
};

enum class TrainStatus { Converged, BudgetExhausted, Failed };

inline const char* train_status_name(TrainStatus s) {
    switch (s) {
        case TrainStatus::Converged: return "converged";
        case TrainStatus::BudgetExhausted: return "budget_exhausted";
        case TrainStatus::Failed: return "failed";
    }
    return "unknown";
}

struct TrainingRun {
    std::string program_name;
    GaitParameters best_params;
    double best_objective = -std::numeric_limits<double>::infinity();
    std::vector<CheckpointStats> history;
    std::vector<double> best_objective_per_iteration;
    std::vector<WeightUpdate> rescales;
    std::set<std::string> flagged_uninformative;
    std::map<std::string, double> final_weights;
    TrainStatus status = TrainStatus::BudgetExhausted;
    std::string failure_reason;

    bool failed() const { return status == TrainStatus::Failed; }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["program_name"] = program_name;
        j["best_params"] = best_params.to_json();
        j["best_objective"] = best_objective;
        j["status"] = train_status_name(status);
        if (!failure_reason.empty()) j["failure_reason"] = failure_reason;
        j["best_objective_per_iteration"] = best_objective_per_iteration;
        j["history"] = nlohmann::json::array();
        for (const auto& cp : history) {
            nlohmann::json jc = {{"iteration", cp.iteration},
                                 {"best_objective", cp.best_objective}};
            nlohmann::json comps = nlohmann::json::object();
            for (const auto& [name, s] : cp.components)
                comps[name] = {{"mean", s.mean}, {"variance", s.variance}};
            jc["components"] = std::move(comps);
            j["history"].push_back(std::move(jc));
        }
        j["rescales"] = nlohmann::json::array();
        for (const auto& r : rescales)
            j["rescales"].push_back({{"component", r.component},
                                     {"old_weight", r.old_weight},
                                     {"new_weight", r.new_weight},
                                     {"iteration", r.iteration}});
        j["flagged_uninformative"] =
            std::vector<std::string>(flagged_uninformative.begin(), flagged_uninformative.end());
        j["final_weights"] = final_weights;
        return j;
    }
};

struct TrainConfig {
    int budget = 300;              // ES iterations
    int rollout_steps = 1000;      // objective horizon
    double dt = kSimDt;
    std::array<double, 3> command{0.5, 0.0, 0.0};
    Morphology morphology;
    int checkpoint_stride = 100;
    std::uint64_t seed = 0;
    int mu = 8;                    // parents
    int lambda = 32;               // offspring per iteration
    double sigma0_fraction = 0.10; // of each bound range
    double sigma_decay = 0.97;     // per iteration
    // Test hook: replaces the simulator-backed objective with an arbitrary
    // function of the parameters (telemetry sees one "objective" component).
    std::function<double(const GaitParameters&)> objective_override;
};

/// Exact population statistics (variance uses the population convention).
inline std::map<std::string, ComponentStats> checkpoint_telemetry(
    const std::vector<std::string>& names,
    const std::vector<std::vector<double>>& per_member_values) {
    require(!per_member_values.empty(), Errc::InvalidInput,
            "telemetry needs a non-empty population");
    std::map<std::string, ComponentStats> stats;
    const double n = static_cast<double>(per_member_values.size());
    for (std::size_t c = 0; c < names.size(); ++c) {
        double mean = 0.0;
        for (const auto& member : per_member_values) mean += member[c];
        mean /= n;
        double var = 0.0;
        for (const auto& member : per_member_values) {
            const double d = member[c] - mean;
            var += d * d;
        }
        var /= n;
        stats[names[c]] = {mean, var};
    }
    return stats;
}

/// Components whose raw mean grew past 10x its first-checkpoint magnitude
/// (with a 0.1 floor on the reference and a 1.0 absolute gate) get their
/// weight divided by the growth ratio.
inline std::vector<WeightUpdate> rescale_unbounded(const std::vector<CheckpointStats>& history,
                                                   const std::vector<std::string>& names,
                                                   const std::vector<double>& weights) {
    std::vector<WeightUpdate> updates;
    if (history.size() < 2) return updates;
    const CheckpointStats& first = history.front();
    const CheckpointStats& last = history.back();
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto f = first.components.find(names[i]);
        const auto l = last.components.find(names[i]);
        if (f == first.components.end() || l == last.components.end()) continue;
        const double now = std::abs(l->second.mean);
        const double ref = std::max(std::abs(f->second.mean), 0.1);
        const double ratio = now / ref;
        if (now > 1.0 && ratio >= 10.0) {
            WeightUpdate u;
            u.component = names[i];
            u.old_weight = weights[i];
            u.new_weight = weights[i] / ratio;
            u.iteration = last.iteration;
            updates.push_back(u);
        }
    }
    return updates;
}

/// Components whose population variance stayed below 1e-8 at every
/// checkpoint carry no selection signal.
inline std::set<std::string> flag_zero_gradient(const std::vector<CheckpointStats>& history) {
    std::set<std::string> flagged;
    if (history.empty()) return flagged;
    for (const auto& [name, stats] : history.front().components) {
        bool flat = stats.variance < 1e-8;
        for (const auto& cp : history) {
            const auto it = cp.components.find(name);
            flat = flat && it != cp.components.end() && it->second.variance < 1e-8;
        }
        if (flat) flagged.insert(name);
    }
    return flagged;
}

namespace detail {

struct EvalOutcome {
    double objective = -std::numeric_limits<double>::infinity();
    std::vector<double> raw_means;  // per component, unweighted
    bool numeric_failure = false;
    bool infeasible = false;
};

class Candidate {
public:
    std::array<double, GaitParameters::kDims> x{};
    EvalOutcome eval;
};

}  // namespace detail

/// (mu + lambda) evolution strategy over GaitParameters with per-dimension
/// Gaussian perturbations annealed geometrically. Deterministic per seed.
inline TrainingRun train(const dsl::RewardProgram& program, const TrainConfig& config) {
    require(config.budget >= 1, Errc::InvalidInput, "training budget must be >= 1");

    dsl::CompiledProgram compiled;
    std::vector<std::string> component_names;
    if (config.objective_override) {
        component_names = {"objective"};
    } else {
        compiled = dsl::compile(program);
        component_names = compiled.sub_names;
    }

    TrainingRun run;
    run.program_name = program.name;

    const auto& bounds = GaitParameters::bounds();
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto evaluate_candidate = [&](const std::array<double, GaitParameters::kDims>& x) {
        detail::EvalOutcome out;
        const GaitParameters params = GaitParameters::from_array(x);
        if (config.objective_override) {
            out.objective = config.objective_override(params);
            out.raw_means = {out.objective};
            return out;
        }
        std::vector<double> raw(compiled.size(), 0.0);
        std::vector<double> raw_sums(compiled.size(), 0.0);
        double total_sum = 0.0;
        try {
            rollout_visit(params, config.morphology, config.rollout_steps, config.dt,
                          config.command, {}, [&](const SimStep& step) {
                              total_sum += dsl::evaluate_into(compiled, step.obs, raw.data());
                              for (std::size_t c = 0; c < raw.size(); ++c)
                                  raw_sums[c] += raw[c];
                          });
        } catch (const Error& e) {
            if (e.code() == Errc::ParamInfeasible) {
                out.infeasible = true;
                return out;
            }
            if (e.code() == Errc::NumericError) {
                out.numeric_failure = true;
                return out;
            }
            throw;
        }
        out.raw_means.resize(compiled.size());
        for (std::size_t c = 0; c < compiled.size(); ++c)
            out.raw_means[c] = raw_sums[c] / config.rollout_steps;
        out.objective = 0.0;
        for (std::size_t c = 0; c < compiled.size(); ++c)
            out.objective += compiled.weights[c] * out.raw_means[c];
        return out;
    };

    auto reweigh = [&](detail::Candidate& c) {
        // Totals are linear in the weights, so cached raw means stay valid
        // across rescaling.
        if (config.objective_override || c.eval.numeric_failure || c.eval.infeasible) return;
        c.eval.objective = 0.0;
        for (std::size_t k = 0; k < compiled.size(); ++k)
            c.eval.objective += compiled.weights[k] * c.eval.raw_means[k];
    };

    std::array<double, GaitParameters::kDims> sigma0{};
    std::array<double, GaitParameters::kDims> center{};
    for (int d = 0; d < GaitParameters::kDims; ++d) {
        sigma0[d] = config.sigma0_fraction * (bounds.hi[d] - bounds.lo[d]);
        center[d] = 0.5 * (bounds.lo[d] + bounds.hi[d]);
    }

    auto constrain = [&](std::array<double, GaitParameters::kDims>& x) {
        for (int d = 0; d < GaitParameters::kDims; ++d) {
            if (bounds.circular[d])
                x[d] = fract(x[d]);
            else
                x[d] = std::clamp(x[d], bounds.lo[d], bounds.hi[d]);
        }
    };

    std::vector<detail::Candidate> parents;
    for (int p = 0; p < config.mu; ++p) {
        detail::Candidate c;
        c.x = center;
        if (p > 0)
            for (int d = 0; d < GaitParameters::kDims; ++d)
                c.x[d] += sigma0[d] * gauss(rng);
        constrain(c.x);
        c.eval = evaluate_candidate(c.x);
        parents.push_back(std::move(c));
    }
    auto by_objective = [](const detail::Candidate& a, const detail::Candidate& b) {
        return a.eval.objective > b.eval.objective;
    };
    std::stable_sort(parents.begin(), parents.end(), by_objective);

    double best_so_far = parents.front().eval.objective;
    run.best_params = GaitParameters::from_array(parents.front().x);
    run.best_objective = best_so_far;

    const int stride = std::max(1, config.checkpoint_stride);
    for (int iter = 1; iter <= config.budget; ++iter) {
        const double anneal = std::pow(config.sigma_decay, iter - 1);
        std::uniform_int_distribution<int> pick_parent(0,
                                                       static_cast<int>(parents.size()) - 1);

        std::vector<detail::Candidate> offspring;
        offspring.reserve(static_cast<std::size_t>(config.lambda));
        int numeric_failures = 0;
        for (int o = 0; o < config.lambda; ++o) {
            detail::Candidate c;
            c.x = parents[static_cast<std::size_t>(pick_parent(rng))].x;
            for (int d = 0; d < GaitParameters::kDims; ++d)
                c.x[d] += sigma0[d] * anneal * gauss(rng);
            constrain(c.x);
            c.eval = evaluate_candidate(c.x);
            if (c.eval.numeric_failure) ++numeric_failures;
            offspring.push_back(std::move(c));
        }

        if (numeric_failures * 2 > config.lambda) {
            run.status = TrainStatus::Failed;
            run.failure_reason = "numeric";
            break;
        }

        std::vector<detail::Candidate> pool = parents;
        pool.insert(pool.end(), offspring.begin(), offspring.end());
        std::stable_sort(pool.begin(), pool.end(), by_objective);
        pool.resize(static_cast<std::size_t>(config.mu));
        parents = std::move(pool);

        best_so_far = std::max(best_so_far, parents.front().eval.objective);
        run.best_objective_per_iteration.push_back(best_so_far);

        if (iter % stride == 0 || iter == config.budget) {
            CheckpointStats cp;
            cp.iteration = iter;
            cp.best_objective = best_so_far;
            std::vector<std::vector<double>> population;
            for (const auto& c : offspring)
                if (!c.eval.numeric_failure && !c.eval.infeasible)
                    population.push_back(c.eval.raw_means);
            if (!population.empty())
                cp.components = checkpoint_telemetry(component_names, population);
            run.history.push_back(std::move(cp));

            if (!config.objective_override) {
                const auto updates =
                    rescale_unbounded(run.history, compiled.sub_names, compiled.weights);
                for (const auto& u : updates) {
                    compiled.weights[static_cast<std::size_t>(
                        compiled.index_of(u.component))] = u.new_weight;
                    run.rescales.push_back(u);
                }
                if (!updates.empty()) {
                    for (auto& c : parents) reweigh(c);
                    std::stable_sort(parents.begin(), parents.end(), by_objective);
                    best_so_far = parents.front().eval.objective;
                }
            }
        }
    }

    if (run.status != TrainStatus::Failed) {
        // Converged when the best objective went flat over the trailing
        // tenth of the budget (at least 20 iterations).
        const int window = std::max(20, config.budget / 10);
        const auto& curve = run.best_objective_per_iteration;
        if (static_cast<int>(curve.size()) > window &&
            curve.back() - curve[curve.size() - 1 - static_cast<std::size_t>(window)] < 1e-9)
            run.status = TrainStatus::Converged;
        else
            run.status = TrainStatus::BudgetExhausted;
    }

    // Final best under the final weights.
    std::stable_sort(parents.begin(), parents.end(), by_objective);
    run.best_params = GaitParameters::from_array(parents.front().x);
    run.best_objective = parents.front().eval.objective;
    run.flagged_uninformative = flag_zero_gradient(run.history);
    for (std::size_t i = 0; i < component_names.size(); ++i)
        run.final_weights[component_names[i]] =
            config.objective_override ? 1.0 : compiled.weights[i];
    return run;
}

}  // namespace sds
