#include "nanomag/model_io.hpp"

#include <fstream>
#include <set>

#include "nanomag/errors.hpp"

namespace nanomag {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw InvalidInput(where + " must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items()) {
    if (!ok.count(key)) throw InvalidInput("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T required(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw InvalidInput("missing key '" + std::string(key) + "' in " + where);
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidInput("bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
  }
}

HalfInt spin_value(const json& v, const std::string& where) {
  if (v.is_string()) return HalfInt::parse(v.get<std::string>());
  if (v.is_number()) return HalfInt::parse(v.dump());
  throw InvalidInput("spin in " + where + " must be a string like \"5/2\" or a number");
}

}  // namespace

json model_to_json(const SpinModel& model) {
  json doc;
  doc["name"] = model.cluster->name();
  json sites = json::array();
  for (const auto& s : model.cluster->sites()) {
    sites.push_back({{"s", s.s.str()}, {"sublattice", to_string(s.sublattice)}, {"label", s.label}});
  }
  doc["sites"] = sites;
  json ex = json::array();
  for (const auto& c : model.exchange) ex.push_back({{"i", c.i}, {"j", c.j}, {"J_kelvin", c.J}});
  doc["exchange"] = ex;
  json dm = json::array();
  for (const auto& c : model.dm) dm.push_back({{"i", c.i}, {"j", c.j}, {"Dz_kelvin", c.Dz}});
  doc["dm"] = dm;
  doc["source"] = model.source;
  return doc;
}

SpinModel model_from_json(const json& doc) {
  reject_unknown(doc, {"name", "sites", "exchange", "dm", "source"}, "model");
  const auto name = required<std::string>(doc, "name", "model");
  if (!doc.contains("sites") || !doc["sites"].is_array()) throw InvalidInput("model needs a 'sites' array");

  std::vector<SpinSite> sites;
  int idx = 0;
  for (const auto& s : doc["sites"]) {
    const std::string where = "sites[" + std::to_string(idx) + "]";
    reject_unknown(s, {"s", "sublattice", "label"}, where);
    if (!s.contains("s")) throw InvalidInput("missing key 's' in " + where);
    SpinSite site;
    site.index = idx;
    site.s = spin_value(s["s"], where);
    site.sublattice = parse_sublattice(required<std::string>(s, "sublattice", where));
    site.label = s.value("label", std::string{});
    sites.push_back(std::move(site));
    ++idx;
  }

  SpinModel model;
  model.cluster = std::make_shared<const SpinCluster>(name, std::move(sites));
  if (doc.contains("exchange")) {
    if (!doc["exchange"].is_array()) throw InvalidInput("'exchange' must be an array");
    int k = 0;
    for (const auto& c : doc["exchange"]) {
      const std::string where = "exchange[" + std::to_string(k++) + "]";
      reject_unknown(c, {"i", "j", "J_kelvin"}, where);
      model.exchange.push_back(
          {required<int>(c, "i", where), required<int>(c, "j", where), required<double>(c, "J_kelvin", where)});
    }
  }
  if (doc.contains("dm")) {
    if (!doc["dm"].is_array()) throw InvalidInput("'dm' must be an array");
    int k = 0;
    for (const auto& c : doc["dm"]) {
      const std::string where = "dm[" + std::to_string(k++) + "]";
      // Only the z component exists; a general vector is a parse error.
      reject_unknown(c, {"i", "j", "Dz_kelvin"}, where);
      model.dm.push_back(
          {required<int>(c, "i", where), required<int>(c, "j", where), required<double>(c, "Dz_kelvin", where)});
    }
  }
  model.source = doc.value("source", std::string{});
  model.validate();
  return model;
}

SpinModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open model file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput("malformed JSON in " + path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

void save_model(const SpinModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << model_to_json(model).dump(2) << '\n';
}

}  // namespace nanomag
