#ifndef DIVSAMP_SAMPLERS_HPP
#define DIVSAMP_SAMPLERS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "divsamp/diversity.hpp"
#include "divsamp/example.hpp"
#include "divsamp/schema.hpp"

namespace divsamp {

enum class SampleMethod { Uniform, Uat, CMaxEnt, Hybrid };

const char* sample_method_name(SampleMethod m);
std::optional<SampleMethod> parse_sample_method(const std::string& name);

struct SamplerConfig {
    SampleMethod method = SampleMethod::Uniform;
    std::size_t size = 1;
    std::optional<double> alpha;              // UAT only
    std::uint64_t seed = 0;
    std::optional<std::size_t> candidate_cap;  // CMaxEnt/Hybrid scan budget

    void validate() const;
};

/// Immutable view of a parsed pool: per-example template id and
/// entity-abstracted query, template buckets with full-pool probabilities,
/// and (optionally) the candidate layer used by the greedy samplers:
/// distinct entity-abstracted queries with interned atom/compound multisets
/// and compound containment edges. Safe to share across concurrent runs.
class SamplerPool {
  public:
    static SamplerPool build(const Schema& schema, std::vector<Example> examples,
                             bool with_candidates);

    const Schema& schema() const { return *schema_; }
    std::size_t size() const { return examples_.size(); }
    const Example& example(std::size_t id) const { return examples_[id]; }
    const std::vector<Example>& examples() const { return examples_; }

    std::size_t template_count() const { return template_text_.size(); }
    std::uint32_t template_of(std::size_t id) const { return template_of_[id]; }
    const std::string& template_text(std::uint32_t tid) const { return template_text_[tid]; }
    const std::vector<std::uint32_t>& template_members(std::uint32_t tid) const {
        return template_members_[tid];
    }
    /// p(T) estimated once on the full pool.
    double template_probability(std::uint32_t tid) const {
        return static_cast<double>(template_members_[tid].size()) /
               static_cast<double>(examples_.size());
    }

    const std::string& abstract_query(std::size_t id) const { return abstract_of_[id]; }

    bool has_candidates() const { return with_candidates_; }
    std::size_t candidate_count() const { return candidate_sig_.size(); }
    std::uint32_t candidate_of(std::size_t id) const { return candidate_of_[id]; }
    /// Candidate ids are assigned in lexicographic signature order, so id
    /// order doubles as the greedy tie-break order.
    const std::string& candidate_signature(std::uint32_t cid) const { return candidate_sig_[cid]; }
    const std::vector<std::uint32_t>& candidate_members(std::uint32_t cid) const {
        return candidate_members_[cid];
    }
    std::uint32_t candidate_template(std::uint32_t cid) const { return candidate_template_[cid]; }
    const std::vector<std::uint32_t>& template_candidates(std::uint32_t tid) const {
        return template_candidates_[tid];
    }

    std::size_t atom_count() const { return atom_label_.size(); }
    std::size_t compound_count() const { return comp_label_.size(); }
    const std::string& atom_label(std::uint32_t id) const { return atom_label_[id]; }
    const std::string& compound_label(std::uint32_t id) const { return comp_label_[id]; }
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& candidate_atoms(
        std::uint32_t cid) const {
        return cand_atoms_[cid];
    }
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& candidate_compounds(
        std::uint32_t cid) const {
        return cand_comps_[cid];
    }
    const std::vector<std::uint32_t>& compound_supers(std::uint32_t id) const {
        return comp_supers_[id];
    }
    const std::vector<std::uint32_t>& compound_contained(std::uint32_t id) const {
        return comp_contained_[id];
    }

  private:
    const Schema* schema_ = nullptr;
    std::vector<Example> examples_;
    std::vector<std::uint32_t> template_of_;
    std::vector<std::string> template_text_;
    std::vector<std::vector<std::uint32_t>> template_members_;
    std::vector<std::string> abstract_of_;

    bool with_candidates_ = false;
    std::vector<std::uint32_t> candidate_of_;
    std::vector<std::string> candidate_sig_;
    std::vector<std::vector<std::uint32_t>> candidate_members_;
    std::vector<std::uint32_t> candidate_template_;
    std::vector<std::vector<std::uint32_t>> template_candidates_;
    std::vector<std::string> atom_label_;
    std::vector<std::string> comp_label_;
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> cand_atoms_;
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> cand_comps_;
    std::vector<std::vector<std::uint32_t>> comp_supers_;
    std::vector<std::vector<std::uint32_t>> comp_contained_;
};

/// Ordered selection plus tallies. Distributions always equal a from-scratch
/// recomputation over the chosen examples.
struct SampleState {
    std::vector<std::size_t> chosen;
    Distribution atom_dist;
    Distribution compound_dist;  // super-compound weighted
    std::map<std::string, std::size_t> template_counts;
};

/// H(A) + H(C) in bits.
double objective(const SampleState& state);

/// Per-template remaining counts for without-replacement UAT draws.
class UatRemaining {
  public:
    explicit UatRemaining(const SamplerPool& pool);
    void remove(std::size_t example_id);
    std::size_t remaining(std::uint32_t tid) const { return remaining_[tid]; }
    bool example_remaining(std::size_t example_id) const { return alive_[example_id]; }
    std::size_t total_remaining() const { return total_; }
    std::size_t live_template_count() const { return live_; }

  private:
    const SamplerPool* pool_;
    std::vector<std::size_t> remaining_;
    std::vector<bool> alive_;
    std::size_t total_ = 0;
    std::size_t live_ = 0;
};

/// q_alpha(x) = p(T(x))^alpha / sum over live T' of p(T')^alpha * 1/c_rem(T(x)).
double uat_probability(const SamplerPool& pool, const UatRemaining& remaining,
                       std::size_t example_id, double alpha);

SampleState sample_uniform(const SamplerPool& pool, std::size_t n, std::uint64_t seed);
SampleState sample_uat(const SamplerPool& pool, std::size_t n, double alpha, std::uint64_t seed);
SampleState sample_cmaxent(const SamplerPool& pool, std::size_t n, std::uint64_t seed,
                           std::optional<std::size_t> candidate_cap = std::nullopt);
SampleState sample_hybrid(const SamplerPool& pool, std::size_t n, std::uint64_t seed,
                          std::optional<std::size_t> candidate_cap = std::nullopt);

SampleState run_sampler(const SamplerPool& pool, const SamplerConfig& config);

}  // namespace divsamp

#endif  // DIVSAMP_SAMPLERS_HPP
