#pragma once

// An elicitation session: a problem, an ordered statement log, and the cone
// compiled from it. Report documents are built here so that every front end
// emits the same bytes for the same session version.

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "prefcone/cone.hpp"
#include "prefcone/double_description.hpp"
#include "prefcone/formats.hpp"
#include "prefcone/inference.hpp"
#include "prefcone/statements.hpp"

namespace prefcone {

/// "X1", "X2", "X1,X2", ... in coordinate order.
inline std::vector<std::string> coordinate_labels(const DecisionProblem& problem) {
    std::vector<std::string> out;
    for (std::uint32_t mask = 1; mask <= problem.dimension(); ++mask) {
        std::string label;
        for (std::size_t i = 0; i < problem.attribute_count(); ++i)
            if (SubsetIndex(mask).contains(i)) label += (label.empty() ? "" : ",") + problem.attribute(i).name;
        out.push_back(std::move(label));
    }
    return out;
}

inline Json vector_json(std::span<const double> v) {
    Json j = Json::array();
    for (double x : v) j.push_back(x);
    return j;
}

inline Json witness_json(const std::optional<ScalingVector>& k) {
    if (!k) return nullptr;
    return vector_json(display_normalized(*k).span());
}

inline Json consistency_json(const FeasibilityReport& f) {
    Json j;
    j["status"] = to_string(f.status);
    j["epsilon"] = f.epsilon;
    j["conflict"] = f.conflict;
    return j;
}

inline Json header_json(const std::string& session, std::uint64_t version) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["session"] = session;
    j["version"] = version;
    return j;
}

inline Json report_json(const std::string& session, std::uint64_t version, const DecisionProblem& problem,
                        const FeasibilityReport& feasibility, const OptimalityReport* report) {
    Json j = header_json(session, version);
    j["consistency"] = consistency_json(feasibility);
    Json alts = Json::array();
    Json pairs = Json::array();
    if (report) {
        for (const auto& a : report->alternatives) {
            Json aj;
            aj["name"] = a.name;
            aj["dominated_by"] = a.dominated_by;
            aj["strictly_dominated_by"] = a.strictly_dominated_by;
            aj["equivalent_to"] = a.equivalent_to;
            aj["potentially_optimal"] = a.optimality.weakly;
            aj["strictly_potentially_optimal"] = a.optimality.strictly;
            aj["pairwise_screen"] = a.optimality.pairwise_screen;
            aj["cone_intersection"] = to_string(a.optimality.cone_intersection);
            aj["witness"] = witness_json(a.optimality.witness);
            alts.push_back(std::move(aj));
        }
        for (const auto& p : report->pairs) {
            Json pj;
            pj["first"] = problem.alternatives()[p.first].name;
            pj["second"] = problem.alternatives()[p.second].name;
            pj["verdict"] = to_string(p.result.verdict);
            const auto code = p.result.code();
            pj["code"] = code ? Json(*code) : Json(nullptr);
            pj["method"] = to_string(p.result.method);
            pj["strict"] = p.result.strict;
            pairs.push_back(std::move(pj));
        }
    }
    j["alternatives"] = std::move(alts);
    j["pairs"] = std::move(pairs);
    return j;
}

inline Json dominance_json(const std::string& session, std::uint64_t version, const std::string& p,
                           const std::string& q, const DominanceResult& r) {
    Json j = header_json(session, version);
    j["first"] = p;
    j["second"] = q;
    j["verdict"] = to_string(r.verdict);
    const auto code = r.code();
    j["code"] = code ? Json(*code) : Json(nullptr);
    j["method"] = to_string(r.method);
    j["strict"] = r.strict;
    j["margin"] = r.margin;
    Json w;
    w["first_preferred"] = witness_json(r.first_preferred);
    w["second_preferred"] = witness_json(r.second_preferred);
    j["witnesses"] = std::move(w);
    return j;
}

inline Json inconsistent_json(const std::string& session, std::uint64_t version, const FeasibilityReport& f) {
    Json j = header_json(session, version);
    j["status"] = to_string(f.status);
    j["conflict"] = f.conflict;
    return j;
}

template <class T>
Json generators_json(const GeneratorSet<T>& g) {
    auto rows = [](const std::vector<std::vector<T>>& vs) {
        Json out = Json::array();
        for (const auto& v : vs) {
            Json row = Json::array();
            for (const auto& x : v) {
                if constexpr (std::is_same_v<T, double>)
                    row.push_back(x);
                else
                    row.push_back(x.str());
            }
            out.push_back(std::move(row));
        }
        return out;
    };
    Json j;
    j["rays"] = rows(g.rays);
    j["lineality"] = rows(g.lineality);
    return j;
}

enum class AddStatus { Accepted, Rejected, WarningInconsistent };

inline const char* to_string(AddStatus s) {
    switch (s) {
        case AddStatus::Accepted: return "accepted";
        case AddStatus::Rejected: return "rejected";
        case AddStatus::WarningInconsistent: return "warning_inconsistent";
    }
    return "?";
}

struct AddOutcome {
    AddStatus status = AddStatus::Rejected;
    std::uint64_t version = 0;
    std::string reason;   ///< for Rejected
    std::string pointer;  ///< JSON pointer of the offending field, when known
    std::vector<std::string> conflict;  ///< for WarningInconsistent
};

/// What loading found in the saved cache.
enum class CacheStatus { Absent, Valid, Rebuilt };

class Session {
  public:
    Session(std::string id, DecisionProblem problem, bool additive = false)
        : id_(std::move(id)), problem_(std::move(problem)), additive_(additive) {
        rebuild();
    }

    const std::string& id() const { return id_; }
    std::uint64_t version() const { return version_; }
    const DecisionProblem& problem() const { return problem_; }
    bool additive() const { return additive_; }
    const std::vector<StatementSpec>& statements() const { return specs_; }
    const PreferenceCone& cone() const { return *cone_; }
    /// Consistency of the current store; the conflict core is filled when inconsistent.
    const FeasibilityReport& feasibility() const { return feasibility_; }
    CacheStatus cache_status() const { return cache_status_; }

    /// The store compiled from the log with the given statements left out.
    ConstraintStore compile_without(const std::set<std::string>& removed) const {
        std::vector<IdentifiedStatement> kept;
        for (const auto& s : resolved_)
            if (!removed.contains(s.id)) kept.push_back(s);
        return compile(problem_, kept, {additive_});
    }

    /// Validates a statement document and appends it to the log.
    AddOutcome add(const Json& doc) { return add_all(std::vector<Json>{doc}, false); }

    AddOutcome add(StatementSpec spec) { return add_all(std::vector<StatementSpec>{std::move(spec)}); }

    /// Appends several documents as one version, or none of them if any is rejected.
    /// With `indexed`, rejection pointers are prefixed by the document's array index.
    AddOutcome add_all(const std::vector<Json>& docs, bool indexed = true) {
        std::vector<StatementSpec> specs;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const std::string prefix = indexed ? "/" + std::to_string(i) : "";
            try {
                specs.push_back(statement_from_json(problem_, docs[i], prefix));
            } catch (const ValidationError& e) {
                return rejected(e);
            }
        }
        return add_all(std::move(specs), indexed);
    }

    AddOutcome add_all(std::vector<StatementSpec> specs, bool indexed = false) {
        if (specs.empty()) return rejected(ValidationError("", "no statements given"));
        std::set<std::string> ids;
        for (const auto& s : specs_) ids.insert(s.id);
        std::vector<IdentifiedStatement> resolved;
        for (std::size_t i = 0; i < specs.size(); ++i) {
            const std::string prefix = indexed ? "/" + std::to_string(i) : "";
            if (!ids.insert(specs[i].id).second)
                return rejected(ValidationError(prefix + "/id", "duplicate statement id '" + specs[i].id + "'"));
            try {
                resolved.push_back(resolve(problem_, specs[i]));
                statement_constraints(problem_, resolved.back());
            } catch (const ValidationError& e) {
                return rejected(ValidationError(prefix, e.what()));
            }
        }
        for (auto& s : specs) specs_.push_back(std::move(s));
        for (auto& s : resolved) resolved_.push_back(std::move(s));
        ++version_;
        rebuild();
        AddOutcome out;
        out.version = version_;
        if (feasibility_.status == ConsistencyStatus::Inconsistent) {
            out.status = AddStatus::WarningInconsistent;
            out.conflict = feasibility_.conflict;
        } else {
            out.status = AddStatus::Accepted;
        }
        return out;
    }

    /// Removes a statement and every constraint derived from it. False if the id is unknown.
    bool remove(const std::string& statement_id) { return remove_all({statement_id}); }

    /// Removes all given statements as one version. False, removing nothing, if any id is unknown.
    bool remove_all(const std::vector<std::string>& statement_ids) {
        const std::set<std::string> drop(statement_ids.begin(), statement_ids.end());
        std::size_t found = 0;
        for (const auto& s : specs_) found += drop.contains(s.id);
        if (drop.empty() || found != drop.size()) return false;
        std::erase_if(specs_, [&](const StatementSpec& s) { return drop.contains(s.id); });
        std::erase_if(resolved_, [&](const IdentifiedStatement& s) { return drop.contains(s.id); });
        ++version_;
        rebuild();
        return true;
    }

    /// Report document for the current version, computed once per version.
    Json report() const {
        if (auto cached = cached_report()) return *cached;
        Json j = compute_report();
        std::lock_guard lock(cache_.mutex);
        if (cache_.version != version_ || !cache_.report) {
            cache_.version = version_;
            cache_.report = j;
        }
        return j;
    }

    std::optional<Json> cached_report() const {
        std::lock_guard lock(cache_.mutex);
        if (cache_.report && cache_.version == version_) return cache_.report;
        return std::nullopt;
    }

    /// Unknown alternatives raise ValidationError.
    Json dominance(const std::string& p, const std::string& q) const {
        const auto* a = problem_.find_alternative(p);
        const auto* b = problem_.find_alternative(q);
        if (!a) throw ValidationError("p", "unknown alternative '" + p + "'");
        if (!b) throw ValidationError("q", "unknown alternative '" + q + "'");
        if (!cone_->consistent()) return inconsistent_json(id_, version_, feasibility_);
        return dominance_json(id_, version_, p, q, induced_dominance(problem_, a->prospect, b->prospect, *cone_));
    }

    /// Next query, skipping candidates whose encoding is in `skip`.
    Json suggestion(const std::set<std::string>& skip = {}) const {
        if (!cone_->consistent()) return inconsistent_json(id_, version_, feasibility_);
        Json j = header_json(id_, version_);
        const auto q = suggest_query(problem_, *cone_, skip);
        if (!q) {
            j["query"] = nullptr;
            return j;
        }
        StatementSpec spec;
        if (q->alternatives) {
            const auto& alts = problem_.alternatives();
            spec = {"", true, ComparisonSpec{alts[q->alternatives->first].name, alts[q->alternatives->second].name}};
        } else {
            spec = to_spec(problem_, {"", q->statement});
        }
        spec.id = "query-" + std::to_string(version_ + 1);
        Json qj;
        qj["statement"] = statement_to_json(problem_, spec);
        qj["encoding"] = q->encoding;
        qj["score"] = q->score;
        j["query"] = std::move(qj);
        return j;
    }

    /// Constraint count, slack and, when the dimension is within `cap`, the generators of K.
    Json cone_summary(std::size_t cap) const {
        Json j = header_json(id_, version_);
        j["dimension"] = problem_.dimension();
        j["constraints"] = cone_->constraints().size();
        j["consistency"] = consistency_json(feasibility_);
        j["coordinates"] = coordinate_labels(problem_);
        if (problem_.dimension() <= cap) {
            j["generators"] = generators_json(dual_generators(cone_->constraints(), {cap}));
        } else {
            j["generators"] = nullptr;
            j["generator_note"] = DimensionCapExceeded(problem_.dimension(), cap).what();
        }
        return j;
    }

    /// Session document. The cache is written only when a report for this version exists.
    Json to_json(bool embed_problem = true) const {
        Json j;
        j["schema_version"] = kSchemaVersion;
        j["id"] = id_;
        j["version"] = version_;
        j["additive_restriction"] = additive_;
        if (embed_problem) j["problem"] = problem_to_json(problem_);
        Json log = Json::array();
        for (const auto& s : specs_) log.push_back(statement_to_json(problem_, s));
        j["statements"] = std::move(log);
        if (auto r = cached_report()) {
            Json c;
            c["version"] = version_;
            c["report"] = std::move(*r);
            j["cache"] = std::move(c);
        }
        return j;
    }

    /// Replays the log. `external` is the problem given alongside the document; when the
    /// document embeds one too they must agree. A cache that disagrees with replay is dropped.
    static Session from_json(const Json& j, const DecisionProblem* external = nullptr) {
        using detail::Reader;
        Reader::require_object(j, "", {"schema_version", "id", "version", "additive_restriction", "problem",
                                       "statements", "cache"});
        detail::check_schema_version(j, "");
        auto id = Reader::string(Reader::field(j, "", "id"), "/id");
        const auto version = Reader::unsigned_integer(Reader::field(j, "", "version"), "/version");
        const bool additive = j.contains("additive_restriction") &&
                              Reader::boolean(j["additive_restriction"], "/additive_restriction");

        std::optional<DecisionProblem> embedded;
        if (j.contains("problem")) embedded = problem_from_json(j["problem"], "/problem");
        if (!embedded && !external) throw ValidationError("/problem", "no problem embedded or supplied");
        if (embedded && external && !(*embedded == *external))
            throw ValidationError("/problem", "embedded problem differs from the supplied problem");

        Session s(std::move(id), embedded ? std::move(*embedded) : *external, additive);
        const auto& log = Reader::array(Reader::field(j, "", "statements"), "/statements");
        for (std::size_t i = 0; i < log.size(); ++i) {
            const std::string ptr = "/statements/" + std::to_string(i);
            auto spec = statement_from_json(s.problem_, log[i], ptr);
            for (const auto& prior : s.specs_)
                if (prior.id == spec.id) throw ValidationError(ptr + "/id", "duplicate statement id '" + spec.id + "'");
            auto resolved = resolve(s.problem_, spec);
            s.specs_.push_back(std::move(spec));
            s.resolved_.push_back(std::move(resolved));
        }
        s.version_ = version;
        try {
            s.rebuild();
        } catch (const ValidationError& e) {
            throw ValidationError("/statements", e.what());
        }

        if (j.contains("cache")) {
            const auto& c = j["cache"];
            Reader::require_object(c, "/cache", {"version", "report"});
            const bool same_version = Reader::unsigned_integer(Reader::field(c, "/cache", "version"),
                                                               "/cache/version") == version;
            const Json replayed = s.report();
            s.cache_status_ = same_version && Reader::field(c, "/cache", "report") == replayed ? CacheStatus::Valid
                                                                                             : CacheStatus::Rebuilt;
        }
        return s;
    }

  private:
    struct ReportCache {
        ReportCache() = default;
        ReportCache(const ReportCache& o) {
            std::lock_guard lock(o.mutex);
            version = o.version;
            report = o.report;
        }
        ReportCache& operator=(const ReportCache& o) {
            if (this != &o) {
                std::scoped_lock lock(mutex, o.mutex);
                version = o.version;
                report = o.report;
            }
            return *this;
        }

        mutable std::mutex mutex;
        std::uint64_t version = 0;
        std::optional<Json> report;
    };

    static AddOutcome rejected(const ValidationError& e) {
        AddOutcome out;
        out.status = AddStatus::Rejected;
        out.reason = e.rule();
        out.pointer = e.where();
        return out;
    }

    void rebuild() {
        cone_ = std::make_shared<const PreferenceCone>(compile_without({}));
        feasibility_ = cone_->feasibility();
        if (feasibility_.status == ConsistencyStatus::Inconsistent) {
            std::vector<std::string> ids;
            for (const auto& s : resolved_) ids.push_back(s.id);
            feasibility_.conflict =
                conflict_core(ids, [&](const std::set<std::string>& removed) { return compile_without(removed); });
        }
    }

    Json compute_report() const {
        if (!cone_->consistent()) return report_json(id_, version_, problem_, feasibility_, nullptr);
        const auto r = nondominated_set(problem_, *cone_);
        return report_json(id_, version_, problem_, feasibility_, &r);
    }

    std::string id_;
    DecisionProblem problem_;
    bool additive_ = false;
    std::uint64_t version_ = 0;
    std::vector<StatementSpec> specs_;
    std::vector<IdentifiedStatement> resolved_;
    std::shared_ptr<const PreferenceCone> cone_;
    FeasibilityReport feasibility_;
    mutable ReportCache cache_;
    CacheStatus cache_status_ = CacheStatus::Absent;
};

inline std::string save_session(const Session& s, bool embed_problem = true) {
    return canonical_dump(s.to_json(embed_problem));
}

inline Session load_session(std::string_view text, const DecisionProblem* external = nullptr) {
    return Session::from_json(parse_json(text), external);
}

}  // namespace prefcone
