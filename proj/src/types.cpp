#include "dff/types.hpp"

#include <algorithm>

namespace dff {

std::string to_string(const Literal& lit) {
  return (lit.polarity ? "+" : "-") + std::to_string(lit.feature);
}

const Component* Representation::find_component(ComponentId id) const {
  for (const auto& c : components) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

std::optional<Literal> Representation::separating(ComponentId i,
                                                  ComponentId j) const {
  auto it = separation.find({i, j});
  if (it == separation.end()) return std::nullopt;
  return it->second;
}

void Instance::reindex() {
  index_.clear();
  index_.reserve(examples.size());
  for (std::size_t pos = 0; pos < examples.size(); ++pos) {
    index_.emplace(examples[pos].id, pos);
  }
}

std::size_t Instance::index_of(ExampleId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw Error(ErrorKind::InvalidArgument,
                "unknown example id " + std::to_string(id));
  }
  return it->second;
}

const Example& Instance::example(ExampleId id) const {
  return examples[index_of(id)];
}

ComponentId Instance::home_component(ExampleId id) const {
  auto it = component_of.find(id);
  if (it == component_of.end()) {
    throw Error(ErrorKind::InvalidArgument,
                "no home component for example " + std::to_string(id));
  }
  return it->second;
}

LabelId Instance::concept(ExampleId id) const {
  auto it = concept_label.find(id);
  if (it == concept_label.end()) {
    throw Error(ErrorKind::InvalidArgument,
                "no concept label for example " + std::to_string(id));
  }
  return it->second;
}

bool Instance::is_exception(ExampleId id) const {
  return std::binary_search(exceptions.begin(), exceptions.end(), id);
}

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::Malformed: return "malformed";
    case ViolationKind::Coverage: return "coverage";
    case ViolationKind::Purity: return "purity";
    case ViolationKind::Separation: return "separation";
    case ViolationKind::ExceptionSet: return "exception-set";
    case ViolationKind::ExceptionCount: return "exception-count";
  }
  return "unknown";
}

}  // namespace dff
