#pragma once

// JSON interchange documents and the `dirac` command surface.
//
// Document layout:
//   {"version": "dirac-spec/1", "variables": [...], "object": {"kind": ..., ...}}
// All mathematical payloads are expression strings. See docs/dirac-spec.schema.json.

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "dirac/constraints.hpp"
#include "json.hpp"

namespace dirac::cli {

inline constexpr const char* kVersion = "dirac-spec/1";

struct Points {
    std::vector<Point> points;
    std::vector<std::pair<Point, Point>> pairs;  // same-fibre pairs for pushforward
};

using SpecObject = std::variant<DiracField, LinearDirac<Rational>, LagrangianRelation<Rational>, ConstraintSystem,
                                PolyMap, Points>;

struct Document {
    Variables variables;
    SpecObject object;
};

/// Throws ParseError (JSON syntax, layout, or expression errors; the message
/// names the offending field) and PreconditionError for invalid mathematics.
Document parse_document(const std::string& text);
Document read_document(const std::string& path);

nlohmann::ordered_json to_json(const Variables& vars, const SpecObject& obj);
std::string emit_document(const Variables& vars, const SpecObject& obj);

/// Exit codes: 0 ok, 1 property failure, 2 parse error, 3 precondition violation.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dirac::cli
