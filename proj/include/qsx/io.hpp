#pragma once

// File formats: JSON documents with every real printed to 17 significant
// digits, CSV curves with header x,F1,...,FN, and atomic writes.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "qsx/assemble.hpp"
#include "qsx/counterexample.hpp"
#include "qsx/error.hpp"

namespace qsx::io {

/// Malformed or schema-violating input.
class InputError : public Error {
 public:
  using Error::Error;
};

using Json = nlohmann::ordered_json;

/// JSON text; reals use %.16e (17 significant digits), non-finite reals become null.
std::string dump(const Json& j, int indent = 2);

/// Parses text, reporting line and column of syntax errors as InputError.
Json parse(const std::string& text, const std::string& source);

std::string read_file(const std::string& path);

/// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

struct InputDocument {
  SiteMap map;
  std::optional<PowerModulus> modulus;
  ExtensionConfig config;
  std::optional<std::size_t> samples;
};

/// {"points": [...], "images": [[...], ...], "modulus": {"C", "alpha"}?,
///  "config": {"periods", "resolution", "samples", "seed"}?}.
/// Points may come in any order; they are sorted together with their images.
InputDocument parse_input(const Json& doc);

Json to_json(const PowerModulus& m);
Json to_json(const ExtensionMap& f);
ExtensionMap extension_from_json(const Json& doc);
Json to_json(const VerificationReport& r);

/// `samples` uniformly spaced rows over the window, in input coordinates.
std::string curve_csv(const ExtensionMap& f, std::size_t samples);

Json scene_json(const Scene& scene);

}  // namespace qsx::io
