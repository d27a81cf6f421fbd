#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

#include "wmt/experiments.hpp"
#include "wmt/measures.hpp"
#include "wmt/multiscale.hpp"

namespace wmt {

enum class FileFormat { Json, Csv };

/// "json" / "csv"; anything else is BadParameter.
FileFormat parse_format(std::string_view name);
/// Format implied by the file extension, defaulting to JSON.
FileFormat format_from_path(const std::filesystem::path& path);

nlohmann::json to_json(const Measure& m);
nlohmann::json to_json(const MeasureSequence& seq);
nlohmann::json to_json(const Detail& psi);
nlohmann::json to_json(const Pyramid& pyr);

/// Parse and validate. Missing "level" means default_level(n).
MeasureSequence sequence_from_json(const nlohmann::json& j);
Pyramid pyramid_from_json(const nlohmann::json& j);

/// Header row of scalar support points, then one weight row per element.
MeasureSequence sequence_from_csv(std::string_view text);
/// Needs a discrete sequence in R^1; the header is the union of supports.
std::string sequence_to_csv(const MeasureSequence& seq);

MeasureSequence read_sequence(const std::filesystem::path& path, FileFormat format);
MeasureSequence read_sequence(const std::filesystem::path& path);
void write_sequence(const std::filesystem::path& path, const MeasureSequence& seq, FileFormat format);

Pyramid read_pyramid(const std::filesystem::path& path);
void write_pyramid(const std::filesystem::path& path, const Pyramid& pyr);

/// Tidy table: level,index,time,norm for every detail.
std::string norms_csv(const Pyramid& pyr);

GaussianCurveSpec curve_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GaussianCurveSpec& spec);
DipoleSpec dipole_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DipoleSpec& spec);

std::string read_text(const std::filesystem::path& path);
/// Throws IoError or ParseError.
nlohmann::json read_json(const std::filesystem::path& path);
/// Writes to a sibling temp file, then renames over `path`.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal that parses back to the same double.
std::string format_double(double x);

}  // namespace wmt
