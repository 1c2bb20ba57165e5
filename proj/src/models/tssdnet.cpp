#include "synthattr/models/tssdnet.hpp"

#include <map>
#include <set>
#include <sstream>

namespace synthattr::models {

namespace {

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stoi(cell));
  return out;
}

std::string join_int_list(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(xs[i]);
  }
  return out;
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string part;
  while (ss >> part) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw ConfigInvalid("bad config token: " + part);
    out[part.substr(0, eq)] = part.substr(eq + 1);
  }
  return out;
}

}  // namespace

void IncTssdConfig::validate() const {
  if (branch_channels < 1) throw ConfigInvalid("branch_channels must be >= 1");
  if (num_blocks < 1) throw ConfigInvalid("num_blocks must be >= 1");
  if (penultimate_width < 1) throw ConfigInvalid("penultimate_width must be >= 1");
  if (num_classes != 5 && num_classes != 6)
    throw ConfigInvalid("num_classes must be 5 or 6");
  if (dilations.empty()) throw ConfigInvalid("dilations must be non-empty");
  std::set<int> seen;
  for (int d : dilations) {
    if (d < 1) throw ConfigInvalid("dilations must be >= 1");
    if (!seen.insert(d).second) throw ConfigInvalid("dilations must be distinct");
  }
}

std::string IncTssdConfig::to_config_string() const {
  std::ostringstream os;
  os << "branch_channels=" << branch_channels << " num_blocks=" << num_blocks
     << " penultimate_width=" << penultimate_width << " num_classes=" << num_classes
     << " dilations=" << join_int_list(dilations);
  return os.str();
}

IncTssdConfig IncTssdConfig::from_config_string(const std::string& text) {
  IncTssdConfig cfg;
  for (const auto& [key, value] : parse_kv(text)) {
    if (key == "branch_channels")
      cfg.branch_channels = std::stoi(value);
    else if (key == "num_blocks")
      cfg.num_blocks = std::stoi(value);
    else if (key == "penultimate_width")
      cfg.penultimate_width = std::stoi(value);
    else if (key == "num_classes")
      cfg.num_classes = std::stoi(value);
    else if (key == "dilations")
      cfg.dilations = parse_int_list(value);
    else
      throw ConfigInvalid("unknown inc-tssd config key: " + key);
  }
  cfg.validate();
  return cfg;
}

void ResTssdConfig::validate() const {
  if (stage_channels.empty()) throw ConfigInvalid("stage_channels must be non-empty");
  for (std::size_t i = 1; i < stage_channels.size(); ++i)
    if (stage_channels[i] <= stage_channels[i - 1])
      throw ConfigInvalid("stage_channels must be strictly increasing");
  if (stage_channels.front() < 1) throw ConfigInvalid("stage_channels must be >= 1");
  if (blocks_per_stage < 1) throw ConfigInvalid("blocks_per_stage must be >= 1");
  if (penultimate_width < 1) throw ConfigInvalid("penultimate_width must be >= 1");
  if (num_classes != 5 && num_classes != 6)
    throw ConfigInvalid("num_classes must be 5 or 6");
}

std::string ResTssdConfig::to_config_string() const {
  std::ostringstream os;
  os << "stage_channels=" << join_int_list(stage_channels)
     << " blocks_per_stage=" << blocks_per_stage
     << " penultimate_width=" << penultimate_width << " num_classes=" << num_classes;
  return os.str();
}

ResTssdConfig ResTssdConfig::from_config_string(const std::string& text) {
  ResTssdConfig cfg;
  for (const auto& [key, value] : parse_kv(text)) {
    if (key == "stage_channels")
      cfg.stage_channels = parse_int_list(value);
    else if (key == "blocks_per_stage")
      cfg.blocks_per_stage = std::stoi(value);
    else if (key == "penultimate_width")
      cfg.penultimate_width = std::stoi(value);
    else if (key == "num_classes")
      cfg.num_classes = std::stoi(value);
    else
      throw ConfigInvalid("unknown res-tssd config key: " + key);
  }
  cfg.validate();
  return cfg;
}

}  // namespace synthattr::models
