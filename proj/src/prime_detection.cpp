#include "dbcl/prime_detection.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace dbcl {

void validate_config(const DetectionConfig& cfg) {
    if (cfg.k_max < 0) throw Error("k_max must be non-negative");
    if (cfg.max_cond_size < 0) throw Error("max_cond_size must be non-negative");
    if (!(cfg.alpha > 0 && cfg.alpha < 1)) throw Error("alpha must lie in (0, 1)");
}

DetectionResult detect_primes(const std::vector<std::string>& variables, const DetectionConfig& cfg,
                              const CiTest& test) {
    validate_config(cfg);
    std::vector<std::string> names = variables;
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end()) throw Error("duplicate variable name");

    DetectionResult out;
    std::set<std::string> unresolved(names.begin(), names.end());
    // Candidate pools already searched for each (variable, order); a retest
    // only visits subsets that use at least one newly added column.
    std::map<VarId, std::set<ColumnRef>> searched;

    for (int k = 0; k <= cfg.k_max && !unresolved.empty(); ++k) {
        for (const auto& name : unresolved)
            if (k > 0) out.retained.insert({name, k});

        std::vector<ColumnRef> pool;
        for (const auto& name : names) pool.push_back({{name, 0}, 1});
        for (const auto& id : out.retained)
            if (id.order <= k) pool.push_back({id, 1});
        std::sort(pool.begin(), pool.end());

        std::map<std::string, int> found;
        for (const auto& name : unresolved) {
            for (int i = 0; i <= k; ++i) {
                const VarId target{name, i};
                const ColumnRef future{target, 1}, past{target, 0};
                std::vector<ColumnRef> candidates;
                for (const auto& c : pool)
                    if (c != future) candidates.push_back(c);
                auto& seen = searched[target];
                std::vector<bool> fresh(candidates.size());
                bool any_fresh = false;
                for (std::size_t c = 0; c < candidates.size(); ++c) {
                    fresh[c] = !seen.count(candidates[c]);
                    any_fresh = any_fresh || fresh[c];
                }
                if (!any_fresh) continue;
                out.tested.push_back(target);
                const bool first_search = seen.empty();

                std::vector<ColumnRef> sepset;
                bool separated = false;
                const int n = static_cast<int>(candidates.size());
                for (int size = 0; size <= std::min(cfg.max_cond_size, n) && !separated; ++size) {
                    separated = for_each_subset(n, size, [&](const std::vector<int>& idx) {
                        if (!first_search && std::none_of(idx.begin(), idx.end(), [&](int j) { return fresh[j]; }))
                            return false;
                        std::vector<ColumnRef> z;
                        for (int j : idx) z.push_back(candidates[j]);
                        ++out.query_count;
                        if (test.test(past, future, z) == CiDecision::Independent) {
                            sepset = std::move(z);
                            return true;
                        }
                        return false;
                    });
                }
                seen.insert(candidates.begin(), candidates.end());
                if (separated) {
                    found[name] = i;
                    out.separating_sets[name] = sepset;
                    break;
                }
            }
        }
        for (const auto& [name, order] : found) {
            unresolved.erase(name);
            out.primes[name] = order;
            for (auto it = out.retained.begin(); it != out.retained.end();)
                it = (it->base == name && it->order > order) ? out.retained.erase(it) : std::next(it);
        }
    }

    for (const auto& name : names) {
        if (unresolved.count(name)) {
            out.primes[name] = std::nullopt;
            out.nodes.push_back({{name, 0}, Role::unresolved()});
            out.warnings.push_back(fmt::format(
                "no difference of {} up to order {} is independent of its own future; left unresolved", name,
                cfg.k_max));
            for (int k = 1; k <= cfg.k_max; ++k) out.retained.insert({name, k});
        } else {
            auto chain = chain_nodes(name, *out.primes[name]);
            out.nodes.insert(out.nodes.end(), chain.begin(), chain.end());
        }
    }
    return out;
}

DetectionResult detect_primes(const TimeSeriesDataset& data, const DetectionConfig& cfg) {
    validate_dataset(data);
    validate_config(cfg);
    auto table = build_two_slice(data, cfg.k_max, all_differences(data.variables, cfg.k_max));
    FisherZTest test(table, cfg.alpha);
    auto result = detect_primes(data.variables, cfg, test);
    for (auto& w : test.warnings()) result.warnings.push_back(std::move(w));
    return result;
}

}  // namespace dbcl
