#include <cmath>
#include <fstream>
#include <sstream>

#include "attsum/error.hpp"
#include "attsum/model.hpp"
#include "json.hpp"

namespace attsum::model {
namespace {

using nlohmann::json;

const char* pooling_name(Pooling p) { return p == Pooling::Sum ? "sum" : "attention"; }

json matrix_json(const Matrix& m) {
  json arr = json::array();
  for (double x : m.flat()) arr.push_back(x);
  return arr;
}

Matrix matrix_from_json(const json& arr, std::size_t rows, std::size_t cols, const char* name) {
  if (!arr.is_array() || arr.size() != rows * cols)
    throw FormatError(std::string("checkpoint ") + name + " has " +
                      std::to_string(arr.is_array() ? arr.size() : 0) + " entries, expected " +
                      std::to_string(rows * cols) + " for the declared shape " +
                      std::to_string(rows) + "x" + std::to_string(cols));
  Matrix m(rows, cols);
  auto flat = m.flat();
  for (std::size_t i = 0; i < flat.size(); ++i) {
    if (!arr[i].is_number()) throw FormatError(std::string("checkpoint ") + name + ": non-numeric entry");
    flat[i] = arr[i].get<double>();
    if (!std::isfinite(flat[i])) throw FormatError(std::string("checkpoint ") + name + ": non-finite entry");
  }
  return m;
}

std::size_t positive_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_unsigned() || j[key].get<std::size_t>() == 0)
    throw FormatError(std::string("checkpoint field '") + key + "' must be a positive integer");
  return j[key].get<std::size_t>();
}

}  // namespace

std::string checkpoint_to_string(const ModelParams& params) {
  json j;
  j["format"] = kCheckpointFormat;
  j["h"] = params.config.h;
  j["k"] = params.config.k;
  j["l"] = params.config.l;
  j["pooling"] = pooling_name(params.config.pooling);
  j["W"] = matrix_json(params.W);
  j["M"] = matrix_json(params.M);
  return j.dump() + "\n";
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write checkpoint " + path.string());
  out << checkpoint_to_string(params);
  if (!out) throw FormatError("failed writing checkpoint " + path.string());
}

ModelParams checkpoint_from_string(const std::string& content) {
  const json j = json::parse(content, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("format") || !j["format"].is_string())
    throw FormatError("not an AttSum checkpoint");
  const auto format = j["format"].get<std::string>();
  if (format.rfind("attsum.", 0) != 0) throw FormatError("not an AttSum checkpoint");
  if (format != kCheckpointFormat)
    throw FormatError("unsupported checkpoint version '" + format + "' (expected " +
                      kCheckpointFormat + ")");
  ModelParams p;
  p.config.h = positive_field(j, "h");
  p.config.k = positive_field(j, "k");
  p.config.l = positive_field(j, "l");
  const std::string pooling = j.value("pooling", std::string("attention"));
  if (pooling == "sum")
    p.config.pooling = Pooling::Sum;
  else if (pooling != "attention")
    throw FormatError("checkpoint pooling must be 'attention' or 'sum'");
  p.W = matrix_from_json(j.value("W", json()), p.config.l, p.config.h * p.config.k, "W");
  p.M = matrix_from_json(j.value("M", json()), p.config.l, p.config.l, "M");
  return p;
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace attsum::model
