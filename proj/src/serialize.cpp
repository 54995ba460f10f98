#include "dff/serialize.hpp"

#include <map>

#include "json.hpp"

namespace dff {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string bits_to_string(const Bits& bits) {
  std::string out(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out[i] = '1';
  }
  return out;
}

Bits bits_from_string(const std::string& text) {
  Bits bits(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '1') {
      bits[i] = true;
    } else if (text[i] != '0') {
      throw Error(ErrorKind::Parse, "bit string must contain only 0/1");
    }
  }
  return bits;
}

ordered_json parse(const std::string& text) {
  ordered_json doc = ordered_json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorKind::Parse, "malformed JSON");
  }
  return doc;
}

template <typename T>
T get_field(const ordered_json& doc, const char* key) {
  if (!doc.contains(key)) {
    throw Error(ErrorKind::Parse, std::string("missing field: ") + key);
  }
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("bad field ") + key + ": " + e.what());
  }
}

}  // namespace

std::string instance_to_json(const Instance& instance, int indent) {
  ordered_json doc;
  doc["d"] = instance.d;
  doc["labels"] = instance.label_count;

  ordered_json examples = ordered_json::array();
  for (const auto& ex : instance.examples) {
    examples.push_back({{"id", ex.id}, {"bits", bits_to_string(ex.bits)}});
  }
  doc["examples"] = std::move(examples);

  ordered_json components = ordered_json::array();
  for (const auto& comp : instance.representation.components) {
    components.push_back(
        {{"id", comp.id}, {"label", comp.label}, {"members", comp.members}});
  }
  doc["components"] = std::move(components);

  ordered_json separation = ordered_json::array();
  for (const auto& [key, lit] : instance.representation.separation) {
    separation.push_back({{"i", key.first},
                          {"j", key.second},
                          {"feature", lit.feature},
                          {"polarity", lit.polarity}});
  }
  doc["separation"] = std::move(separation);

  std::map<ExampleId, ComponentId> comp_of(instance.component_of.begin(),
                                           instance.component_of.end());
  ordered_json comp_of_json = ordered_json::object();
  for (const auto& [id, comp] : comp_of) {
    comp_of_json[std::to_string(id)] = comp;
  }
  doc["componentOf"] = std::move(comp_of_json);

  std::map<ExampleId, LabelId> concepts(instance.concept_label.begin(),
                                        instance.concept_label.end());
  ordered_json concept_json = ordered_json::object();
  for (const auto& [id, label] : concepts) {
    concept_json[std::to_string(id)] = label;
  }
  doc["conceptLabel"] = std::move(concept_json);

  doc["exceptions"] = instance.exceptions;
  doc["k"] = instance.k;
  doc["s"] = instance.s;
  return doc.dump(indent) + "\n";
}

Instance instance_from_json(const std::string& text) {
  ordered_json doc = parse(text);
  Instance inst;
  inst.d = get_field<std::uint32_t>(doc, "d");
  inst.label_count = get_field<std::uint32_t>(doc, "labels");

  for (const auto& entry : get_field<ordered_json>(doc, "examples")) {
    Example ex;
    ex.id = get_field<ExampleId>(entry, "id");
    ex.bits = bits_from_string(get_field<std::string>(entry, "bits"));
    inst.examples.push_back(std::move(ex));
  }

  for (const auto& entry : get_field<ordered_json>(doc, "components")) {
    Component comp;
    comp.id = get_field<ComponentId>(entry, "id");
    comp.label = get_field<LabelId>(entry, "label");
    comp.members = get_field<std::vector<ExampleId>>(entry, "members");
    inst.representation.components.push_back(std::move(comp));
  }

  for (const auto& entry : get_field<ordered_json>(doc, "separation")) {
    auto i = get_field<ComponentId>(entry, "i");
    auto j = get_field<ComponentId>(entry, "j");
    Literal lit{get_field<FeatureIndex>(entry, "feature"),
                get_field<bool>(entry, "polarity")};
    inst.representation.separation.emplace(std::make_pair(i, j), lit);
  }

  for (const auto& [key, value] : get_field<ordered_json>(doc, "componentOf").items()) {
    inst.component_of[static_cast<ExampleId>(std::stoul(key))] =
        value.get<ComponentId>();
  }
  for (const auto& [key, value] : get_field<ordered_json>(doc, "conceptLabel").items()) {
    inst.concept_label[static_cast<ExampleId>(std::stoul(key))] =
        value.get<LabelId>();
  }

  inst.exceptions = get_field<std::vector<ExampleId>>(doc, "exceptions");
  inst.k = get_field<std::uint32_t>(doc, "k");
  inst.s = get_field<std::uint32_t>(doc, "s");
  inst.reindex();
  return inst;
}

std::string stream_to_json(const Stream& stream, int indent) {
  ordered_json doc;
  ordered_json order = ordered_json::array();
  order.push_back(stream.init);
  for (ExampleId id : stream.rounds) order.push_back(id);
  doc["order"] = std::move(order);
  return doc.dump(indent) + "\n";
}

Stream stream_from_json(const std::string& text) {
  ordered_json doc = parse(text);
  auto order = get_field<std::vector<ExampleId>>(doc, "order");
  if (order.empty()) {
    throw Error(ErrorKind::Parse, "stream order must be nonempty");
  }
  Stream stream;
  stream.init = order.front();
  stream.rounds.assign(order.begin() + 1, order.end());
  return stream;
}

std::string validation_report_to_json(const ValidationReport& report,
                                      int indent) {
  ordered_json doc;
  doc["ok"] = report.ok();
  ordered_json violations = ordered_json::array();
  for (const auto& v : report.violations) {
    violations.push_back({{"kind", to_string(v.kind)}, {"detail", v.detail}});
  }
  doc["violations"] = std::move(violations);
  return doc.dump(indent) + "\n";
}

}  // namespace dff
