#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "shadowrt/asympt.hpp"
#include "shadowrt/filling.hpp"
#include "shadowrt/fsl_model.hpp"
#include "shadowrt/geometry.hpp"

namespace shadowrt::cli {

using nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

// Everything a presentation file may carry. Only the presentation itself is
// mandatory; commands check for the parts they need.
struct InputDoc {
  FslPresentation presentation;
  std::vector<int> filled;  // 1-based
  std::vector<std::pair<std::int64_t, std::int64_t>> slopes;
  std::optional<AngleSpec> angles;
  std::optional<std::vector<int>> colors;  // one per component
  std::optional<std::vector<int>> signs;   // E, one per filled component
};

// Parses text; malformed JSON raises ParseError with line and column, schema
// problems raise DomainError("SchemaViolation") naming the JSON pointer.
InputDoc parse_input(const std::string& text);
InputDoc read_input(const std::string& path);

json to_json(const LogComplex& v);
json to_json(cplx v);
json to_json(const GeometricSolution& sol);
json to_json(const TorsionReport& t);
json to_json(const AsymptoticReport& rep);
json to_json(const std::vector<Finding>& findings);

}  // namespace shadowrt::cli
