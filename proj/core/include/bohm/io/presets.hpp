#pragma once

#include <string>
#include <vector>

namespace bohm::io {

struct PresetInfo {
  std::string name;
  std::string summary;
};

std::vector<PresetInfo> preset_list();
bool has_preset(const std::string& name);
/// Scenario text of the preset; ConfigError for unknown names.
const std::string& preset_text(const std::string& name);

}  // namespace bohm::io
