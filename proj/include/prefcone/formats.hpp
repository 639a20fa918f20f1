#pragma once

// JSON documents for problems, statements and sessions. Output is canonical:
// fixed field order, two-space indentation, reals with 17 significant digits.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "prefcone/core.hpp"
#include "prefcone/errors.hpp"
#include "prefcone/statements.hpp"

namespace prefcone {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline void write_scalar(std::string& out, const Json& j) {
    if (j.is_number_float()) {
        const double x = j.get<double>();
        if (!std::isfinite(x)) throw ContractViolation("non-finite number in JSON output");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        out += buf;
    } else {
        out += j.dump();
    }
}

inline bool is_flat(const Json& j) {
    for (const auto& x : j)
        if (x.is_structured()) return false;
    return true;
}

inline void write_json(std::string& out, const Json& j, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(2 * depth), ' ');
    if (j.is_array()) {
        if (j.empty()) {
            out += "[]";
        } else if (is_flat(j)) {
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ", ";
                write_scalar(out, j[i]);
            }
            out += ']';
        } else {
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                out += pad;
                write_json(out, j[i], depth + 1);
                out += i + 1 < j.size() ? ",\n" : "\n";
            }
            out += close + "]";
        }
    } else if (j.is_object()) {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        std::size_t i = 0;
        for (auto it = j.begin(); it != j.end(); ++it, ++i) {
            out += pad + Json(it.key()).dump() + ": ";
            write_json(out, it.value(), depth + 1);
            out += i + 1 < j.size() ? ",\n" : "\n";
        }
        out += close + "}";
    } else {
        write_scalar(out, j);
    }
}

}  // namespace detail

/// Canonical text of a document, newline-terminated.
inline std::string canonical_dump(const Json& j) {
    std::string out;
    detail::write_json(out, j, 0);
    out += '\n';
    return out;
}

inline Json parse_json(std::string_view text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ValidationError("", std::string("malformed JSON: ") + e.what());
    }
}

namespace detail {

/// Checked accessors that report failures at a JSON pointer.
class Reader {
  public:
    static void require_object(const Json& j, const std::string& ptr, std::initializer_list<std::string_view> allowed) {
        if (!j.is_object()) throw ValidationError(ptr.empty() ? "/" : ptr, "expected an object");
        for (auto it = j.begin(); it != j.end(); ++it)
            if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
                throw ValidationError(ptr + "/" + it.key(), "unknown field");
    }

    static const Json& field(const Json& j, const std::string& ptr, const std::string& key) {
        auto it = j.find(key);
        if (it == j.end()) throw ValidationError(ptr + "/" + key, "required field missing");
        return *it;
    }

    static std::string string(const Json& j, const std::string& ptr) {
        if (!j.is_string()) throw ValidationError(ptr, "expected a string");
        return j.get<std::string>();
    }

    static double number(const Json& j, const std::string& ptr) {
        if (!j.is_number()) throw ValidationError(ptr, "expected a number");
        return j.get<double>();
    }

    static bool boolean(const Json& j, const std::string& ptr) {
        if (!j.is_boolean()) throw ValidationError(ptr, "expected a boolean");
        return j.get<bool>();
    }

    static std::uint64_t unsigned_integer(const Json& j, const std::string& ptr) {
        if (!j.is_number_integer() || j.get<std::int64_t>() < 0) throw ValidationError(ptr, "expected a nonnegative integer");
        return j.get<std::uint64_t>();
    }

    static const Json& array(const Json& j, const std::string& ptr) {
        if (!j.is_array()) throw ValidationError(ptr, "expected an array");
        return j;
    }

    static std::vector<std::string> strings(const Json& j, const std::string& ptr) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < array(j, ptr).size(); ++i) out.push_back(string(j[i], ptr + "/" + std::to_string(i)));
        return out;
    }
};

inline void check_schema_version(const Json& j, const std::string& ptr) {
    const auto& v = Reader::field(j, ptr, "schema_version");
    if (!v.is_number_integer()) throw ValidationError(ptr + "/schema_version", "expected an integer");
    if (v.get<std::int64_t>() != kSchemaVersion)
        throw ValidationError(ptr + "/schema_version",
                              "unsupported schema version " + std::to_string(v.get<std::int64_t>()) +
                                  " (supported: " + std::to_string(kSchemaVersion) + ")");
}

/// Reruns a core constructor, moving its error to a JSON pointer.
template <class F>
auto at_pointer(const std::string& ptr, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ValidationError& e) {
        throw ValidationError(ptr, e.rule());
    }
}

}  // namespace detail

// Prospects ------------------------------------------------------------------

inline Json support_to_json(const DecisionProblem& problem, const Prospect& p) {
    Json support = Json::array();
    for (const auto& b : p.support()) {
        Json assignment = Json::array();
        for (std::size_t i = 0; i < b.outcome.size(); ++i) assignment.push_back(problem.attribute(i).domain[b.outcome[i]]);
        Json branch;
        branch["probability"] = b.probability;
        branch["assignment"] = std::move(assignment);
        support.push_back(std::move(branch));
    }
    return support;
}

inline Prospect support_from_json(const std::vector<Attribute>& attrs, const Json& j, const std::string& ptr) {
    using detail::Reader;
    std::vector<Branch> branches;
    for (std::size_t b = 0; b < Reader::array(j, ptr).size(); ++b) {
        const std::string bp = ptr + "/" + std::to_string(b);
        Reader::require_object(j[b], bp, {"probability", "assignment"});
        const double pr = Reader::number(Reader::field(j[b], bp, "probability"), bp + "/probability");
        const auto labels = Reader::strings(Reader::field(j[b], bp, "assignment"), bp + "/assignment");
        if (labels.size() != attrs.size())
            throw ValidationError(bp + "/assignment", "expected " + std::to_string(attrs.size()) + " values");
        Outcome x;
        for (std::size_t i = 0; i < labels.size(); ++i)
            x.values.push_back(detail::at_pointer(bp + "/assignment/" + std::to_string(i),
                                                  [&] { return attrs[i].index_of(labels[i]); }));
        branches.push_back({pr, std::move(x)});
    }
    return detail::at_pointer(ptr, [&] { return Prospect::make(std::move(branches)); });
}

// Problems -------------------------------------------------------------------

inline Json problem_to_json(const DecisionProblem& problem) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    Json attrs = Json::array();
    for (const auto& a : problem.attributes()) {
        Json aj;
        aj["name"] = a.name;
        aj["domain"] = a.domain;
        aj["subutility"] = a.subutility;
        attrs.push_back(std::move(aj));
    }
    j["attributes"] = std::move(attrs);
    Json alts = Json::array();
    for (const auto& alt : problem.alternatives()) {
        Json aj;
        aj["name"] = alt.name;
        aj["support"] = support_to_json(problem, alt.prospect);
        alts.push_back(std::move(aj));
    }
    j["alternatives"] = std::move(alts);
    return j;
}

inline DecisionProblem problem_from_json(const Json& j, const std::string& ptr = "") {
    using detail::Reader;
    Reader::require_object(j, ptr, {"schema_version", "attributes", "alternatives"});
    detail::check_schema_version(j, ptr);

    const auto& aj = Reader::array(Reader::field(j, ptr, "attributes"), ptr + "/attributes");
    if (aj.empty()) throw ValidationError(ptr + "/attributes", "at least one attribute required");
    if (aj.size() > kMaxAttributes)
        throw ValidationError(ptr + "/attributes", "at most " + std::to_string(kMaxAttributes) + " attributes supported");
    std::vector<Attribute> attrs;
    std::set<std::string> names;
    for (std::size_t i = 0; i < aj.size(); ++i) {
        const std::string ap = ptr + "/attributes/" + std::to_string(i);
        Reader::require_object(aj[i], ap, {"name", "domain", "subutility"});
        auto name = Reader::string(Reader::field(aj[i], ap, "name"), ap + "/name");
        auto domain = Reader::strings(Reader::field(aj[i], ap, "domain"), ap + "/domain");
        const auto& uj = Reader::array(Reader::field(aj[i], ap, "subutility"), ap + "/subutility");
        std::vector<double> u;
        for (std::size_t v = 0; v < uj.size(); ++v) u.push_back(Reader::number(uj[v], ap + "/subutility/" + std::to_string(v)));
        if (!names.insert(name).second) throw ValidationError(ap + "/name", "duplicate attribute name");
        attrs.push_back(detail::at_pointer(ap, [&] { return Attribute::make(name, domain, u); }));
    }

    std::vector<Alternative> alts;
    names.clear();
    const auto& lj = Reader::array(Reader::field(j, ptr, "alternatives"), ptr + "/alternatives");
    for (std::size_t a = 0; a < lj.size(); ++a) {
        const std::string ap = ptr + "/alternatives/" + std::to_string(a);
        Reader::require_object(lj[a], ap, {"name", "support"});
        auto name = Reader::string(Reader::field(lj[a], ap, "name"), ap + "/name");
        if (name.empty()) throw ValidationError(ap + "/name", "name must be nonempty");
        if (!names.insert(name).second) throw ValidationError(ap + "/name", "duplicate alternative name");
        alts.push_back({std::move(name), support_from_json(attrs, Reader::field(lj[a], ap, "support"), ap + "/support")});
    }
    return detail::at_pointer(ptr.empty() ? "/" : ptr, [&] { return DecisionProblem(std::move(attrs), std::move(alts)); });
}

inline DecisionProblem load_problem(std::string_view text) { return problem_from_json(parse_json(text)); }
inline std::string save_problem(const DecisionProblem& problem) { return canonical_dump(problem_to_json(problem)); }

// Statements -----------------------------------------------------------------

/// A prospect given by alternative name or by an explicit support.
using ProspectSpec = std::variant<std::string, Prospect>;

struct ComparisonSpec {
    ProspectSpec worse, better;
    friend bool operator==(const ComparisonSpec&, const ComparisonSpec&) = default;
};

struct CeterisParibusSpec {
    std::vector<std::string> scope;  ///< attribute names
    std::vector<std::string> worse, better;  ///< domain values aligned with scope
    friend bool operator==(const CeterisParibusSpec&, const CeterisParibusSpec&) = default;
};

/// A statement as written in a document, before resolution against a problem.
struct StatementSpec {
    std::string id;
    bool strict = false;
    std::variant<ComparisonSpec, CeterisParibusSpec> body;
    friend bool operator==(const StatementSpec&, const StatementSpec&) = default;
};

inline Json prospect_spec_to_json(const DecisionProblem& problem, const ProspectSpec& p) {
    Json j;
    if (auto name = std::get_if<std::string>(&p))
        j["alternative"] = *name;
    else
        j["support"] = support_to_json(problem, std::get<Prospect>(p));
    return j;
}

inline Json statement_to_json(const DecisionProblem& problem, const StatementSpec& s) {
    Json j;
    j["id"] = s.id;
    if (auto c = std::get_if<ComparisonSpec>(&s.body)) {
        j["kind"] = "comparison";
        j["strict"] = s.strict;
        j["worse"] = prospect_spec_to_json(problem, c->worse);
        j["better"] = prospect_spec_to_json(problem, c->better);
    } else {
        const auto& cp = std::get<CeterisParibusSpec>(s.body);
        j["kind"] = "ceteris_paribus";
        j["strict"] = s.strict;
        j["scope"] = cp.scope;
        j["worse"] = cp.worse;
        j["better"] = cp.better;
    }
    return j;
}

inline ProspectSpec prospect_spec_from_json(const DecisionProblem& problem, const Json& j, const std::string& ptr) {
    using detail::Reader;
    if (!j.is_object() || j.size() != 1 || !(j.contains("alternative") || j.contains("support")))
        throw ValidationError(ptr, "expected {\"alternative\": name} or {\"support\": [...]}");
    if (j.contains("alternative")) {
        auto name = Reader::string(j["alternative"], ptr + "/alternative");
        if (!problem.find_alternative(name)) throw ValidationError(ptr + "/alternative", "unknown alternative '" + name + "'");
        return name;
    }
    return support_from_json(problem.attributes(), j["support"], ptr + "/support");
}

/// Parses and validates against `problem`; errors name the statement id when known.
inline StatementSpec statement_from_json(const DecisionProblem& problem, const Json& j, const std::string& ptr = "") {
    using detail::Reader;
    Reader::require_object(j, ptr, {"id", "kind", "strict", "worse", "better", "scope"});
    StatementSpec s;
    s.id = Reader::string(Reader::field(j, ptr, "id"), ptr + "/id");
    if (s.id.empty()) throw ValidationError(ptr + "/id", "id must be nonempty");
    const std::string where = " (statement " + s.id + ")";
    try {
        const auto kind = Reader::string(Reader::field(j, ptr, "kind"), ptr + "/kind");
        if (j.contains("strict")) s.strict = Reader::boolean(j["strict"], ptr + "/strict");
        if (kind == "comparison") {
            if (j.contains("scope")) throw ValidationError(ptr + "/scope", "unknown field for a comparison");
            s.body = ComparisonSpec{prospect_spec_from_json(problem, Reader::field(j, ptr, "worse"), ptr + "/worse"),
                                    prospect_spec_from_json(problem, Reader::field(j, ptr, "better"), ptr + "/better")};
        } else if (kind == "ceteris_paribus") {
            CeterisParibusSpec cp;
            cp.scope = Reader::strings(Reader::field(j, ptr, "scope"), ptr + "/scope");
            cp.worse = Reader::strings(Reader::field(j, ptr, "worse"), ptr + "/worse");
            cp.better = Reader::strings(Reader::field(j, ptr, "better"), ptr + "/better");
            if (cp.scope.empty()) throw ValidationError(ptr + "/scope", "scope must be nonempty");
            std::set<std::string> seen;
            for (std::size_t i = 0; i < cp.scope.size(); ++i) {
                const std::string sp = ptr + "/scope/" + std::to_string(i);
                detail::at_pointer(sp, [&] { return problem.attribute_index(cp.scope[i]); });
                if (!seen.insert(cp.scope[i]).second) throw ValidationError(sp, "duplicate attribute in scope");
            }
            for (const auto* side : {&cp.worse, &cp.better}) {
                const std::string sp = ptr + (side == &cp.worse ? "/worse" : "/better");
                if (side->size() != cp.scope.size()) throw ValidationError(sp, "must align with scope");
                for (std::size_t i = 0; i < side->size(); ++i)
                    detail::at_pointer(sp + "/" + std::to_string(i), [&] {
                        return problem.attribute(problem.attribute_index(cp.scope[i])).index_of((*side)[i]);
                    });
            }
            s.body = std::move(cp);
        } else {
            throw ValidationError(ptr + "/kind", "expected \"comparison\" or \"ceteris_paribus\"");
        }
    } catch (const ValidationError& e) {
        throw ValidationError(e.where(), e.rule() + where);
    }
    return s;
}

/// The statement in terms of the problem's prospects and attribute indices.
inline IdentifiedStatement resolve(const DecisionProblem& problem, const StatementSpec& s) {
    if (auto c = std::get_if<ComparisonSpec>(&s.body)) {
        auto prospect = [&](const ProspectSpec& p) -> Prospect {
            if (auto name = std::get_if<std::string>(&p)) {
                const auto* alt = problem.find_alternative(*name);
                if (!alt) throw ValidationError("statement " + s.id, "unknown alternative '" + *name + "'");
                return alt->prospect;
            }
            return std::get<Prospect>(p);
        };
        return {s.id, Comparison{prospect(c->worse), prospect(c->better), s.strict}};
    }
    const auto& cp = std::get<CeterisParibusSpec>(s.body);
    std::vector<std::size_t> order(cp.scope.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<std::size_t> index;
    for (const auto& name : cp.scope) index.push_back(problem.attribute_index(name));
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return index[a] < index[b]; });
    CeterisParibus out{{}, {}, {}, s.strict};
    for (auto i : order) {
        const auto& attr = problem.attribute(index[i]);
        out.scope.push_back(index[i]);
        out.worse.push_back(attr.index_of(cp.worse[i]));
        out.better.push_back(attr.index_of(cp.better[i]));
    }
    return {s.id, std::move(out)};
}

/// Inverse of resolve; comparisons keep explicit supports.
inline StatementSpec to_spec(const DecisionProblem& problem, const IdentifiedStatement& s) {
    if (auto c = std::get_if<Comparison>(&s.statement)) return {s.id, c->strict, ComparisonSpec{c->worse, c->better}};
    const auto& cp = std::get<CeterisParibus>(s.statement);
    CeterisParibusSpec body;
    for (std::size_t i = 0; i < cp.scope.size(); ++i) {
        const auto& attr = problem.attribute(cp.scope[i]);
        body.scope.push_back(attr.name);
        body.worse.push_back(attr.domain[cp.worse[i]]);
        body.better.push_back(attr.domain[cp.better[i]]);
    }
    return {s.id, cp.strict, std::move(body)};
}

}  // namespace prefcone
