#include "caslearn/config.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "caslearn/error.hpp"

extern char** environ;

namespace caslearn {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

double to_double(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    raise(Errc::config_error, "config: bad number '" + v + "' for " + key);
  }
}

long to_long(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    raise(Errc::config_error, "config: bad integer '" + v + "' for " + key);
  }
}

bool to_bool(const std::string& v, const std::string& key) {
  std::string s = lower(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  raise(Errc::config_error, "config: bad boolean '" + v + "' for " + key);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',') {
      cur = trim(cur);
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  cur = trim(cur);
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string format_double_cfg(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += xs[i];
  }
  return out;
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::string section;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        raise(Errc::config_error, "config line " + std::to_string(lineno) + ": unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      raise(Errc::config_error, "config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      raise(Errc::config_error, "config line " + std::to_string(lineno) + ": empty key");
    out[section.empty() ? key : section + "." + key] = value;
  }
  return out;
}

ConfigMap read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::config_error, "config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ConfigMap env_overrides() {
  // known keys come from serializing the defaults, plus the few that are
  // written only when set; anything else in the environment is not ours
  static const std::set<std::string> known = [] {
    ExperimentConfig defaults;
    std::set<std::string> k;
    for (const auto& [key, value] : parse_config_text(write_config(defaults))) k.insert(key);
    for (const char* extra : {"data.path", "data.target", "experiment.out_dir",
                              "experiment.init_checkpoint", "experiment.teacher_checkpoint"})
      k.insert(extra);
    return k;
  }();
  ConfigMap out;
  for (char** e = environ; e && *e; ++e) {
    const char* entry = *e;
    if (std::strncmp(entry, "CASLEARN_", 9) != 0) continue;
    const char* eq = std::strchr(entry, '=');
    if (!eq) continue;
    std::string name(entry + 9, eq - entry - 9);
    size_t us = name.find('_');
    if (us == std::string::npos) continue;
    std::string key = lower(name.substr(0, us)) + "." + lower(name.substr(us + 1));
    if (known.count(key)) out[key] = eq + 1;
  }
  return out;
}

void apply_config(ExperimentConfig& cfg, const ConfigMap& entries) {
  for (const auto& [key, value] : entries) {
    if (key == "data.path") {
      cfg.data_paths = split_list(value);
    } else if (key == "data.target") {
      cfg.target_dataset = static_cast<int>(to_long(value, key));
    } else if (key == "data.t_o") {
      cfg.data.window.t_o = to_double(value, key);
    } else if (key == "data.t_p") {
      cfg.data.window.t_p = to_double(value, key);
    } else if (key == "data.min_observed_nodes") {
      cfg.data.min_observed_nodes = static_cast<int>(to_long(value, key));
    } else if (key == "data.max_observed_nodes") {
      cfg.data.max_observed_nodes = static_cast<int>(to_long(value, key));
    } else if (key == "data.dataset_end_time") {
      cfg.data.dataset_end_time = to_double(value, key);
    } else if (key == "data.train_fraction") {
      cfg.data.train_fraction = to_double(value, key);
    } else if (key == "data.val_fraction") {
      cfg.data.val_fraction = to_double(value, key);
    } else if (key == "data.test_fraction") {
      cfg.data.test_fraction = to_double(value, key);
    } else if (key == "data.seed") {
      cfg.data.seed = static_cast<uint64_t>(to_long(value, key));
    } else if (key == "synth.cascades") {
      cfg.synth_cascades = static_cast<int>(to_long(value, key));
    } else if (key == "synth.branching_mean") {
      cfg.synth.branching_mean = to_double(value, key);
    } else if (key == "synth.time_rate") {
      cfg.synth.time_rate = to_double(value, key);
    } else if (key == "synth.max_size") {
      cfg.synth.max_size = static_cast<int>(to_long(value, key));
    } else if (key == "encoder.feature_mode") {
      std::string m = lower(value);
      if (m == "structural")
        cfg.encoder.features.mode = FeatureMode::structural;
      else if (m == "wavelet")
        cfg.encoder.features.mode = FeatureMode::wavelet;
      else
        raise(Errc::config_error, "config: feature_mode must be structural or wavelet");
    } else if (key == "encoder.wavelet_scale") {
      cfg.encoder.features.wavelet_scale = to_double(value, key);
    } else if (key == "encoder.wavelet_samples") {
      cfg.encoder.features.wavelet_samples = static_cast<int>(to_long(value, key));
    } else if (key == "encoder.wavelet_t_max") {
      cfg.encoder.features.wavelet_t_max = to_double(value, key);
    } else if (key == "encoder.embedding_dim") {
      cfg.encoder.embedding_dim = static_cast<int>(to_long(value, key));
    } else if (key == "encoder.base_width") {
      cfg.encoder.base_width = static_cast<int>(to_long(value, key));
    } else if (key == "encoder.model_size") {
      cfg.encoder.width_multiplier = static_cast<int>(to_long(value, key));
    } else if (key == "encoder.head_design") {
      // "i-j": head depth and the layer the task head attaches to
      size_t dash = value.find('-');
      if (dash == std::string::npos)
        raise(Errc::config_error, "config: head_design must look like '4-1'");
      cfg.encoder.head_depth = static_cast<int>(to_long(trim(value.substr(0, dash)), key));
      cfg.encoder.finetune_layer = static_cast<int>(to_long(trim(value.substr(dash + 1)), key));
    } else if (key == "augment.strategy") {
      std::string m = lower(value);
      if (m == "augsim")
        cfg.augment.strategy = AugStrategy::aug_sim;
      else if (m == "augrwr")
        cfg.augment.strategy = AugStrategy::aug_rwr;
      else if (m == "augsim+augrwr" || m == "augsim_augrwr")
        cfg.augment.strategy = AugStrategy::aug_sim_plus_rwr;
      else
        raise(Errc::config_error, "config: strategy must be augsim, augrwr or augsim+augrwr");
    } else if (key == "augment.eta") {
      cfg.augment.sim.eta = to_double(value, key);
    } else if (key == "augment.theta_t") {
      cfg.augment.sim.theta_t = to_double(value, key);
    } else if (key == "augment.lambda") {
      cfg.augment.sim.lambda = to_double(value, key);
    } else if (key == "augment.fit_lambda") {
      cfg.fit_lambda = to_bool(value, key);
    } else if (key == "augment.strength_mode") {
      std::string m = lower(value);
      if (m == "absolute")
        cfg.augment.sim.strength_mode = StrengthMode::absolute;
      else if (m == "per_node")
        cfg.augment.sim.strength_mode = StrengthMode::per_node;
      else
        raise(Errc::config_error, "config: strength_mode must be absolute or per_node");
    } else if (key == "augment.restart_prob") {
      cfg.augment.rwr.restart_prob = to_double(value, key);
    } else if (key == "augment.walk_budget") {
      cfg.augment.rwr.walk_budget_factor = to_double(value, key);
    } else if (key == "train.batch_size") {
      cfg.batch_size = static_cast<int>(to_long(value, key));
    } else if (key == "train.temperature") {
      cfg.temperature = to_double(value, key);
    } else if (key == "train.pretrain_epochs") {
      cfg.pretrain_epochs = static_cast<int>(to_long(value, key));
    } else if (key == "train.finetune_epochs") {
      cfg.finetune_epochs = static_cast<int>(to_long(value, key));
    } else if (key == "train.distill_epochs") {
      cfg.distill_epochs = static_cast<int>(to_long(value, key));
    } else if (key == "train.patience") {
      cfg.patience = static_cast<int>(to_long(value, key));
    } else if (key == "train.learning_rate") {
      cfg.learning_rate = to_double(value, key);
    } else if (key == "train.use_unlabeled") {
      cfg.use_unlabeled = to_bool(value, key);
    } else if (key == "train.freeze_encoder") {
      cfg.freeze_encoder = to_bool(value, key);
    } else if (key == "train.distill_pool") {
      std::string m = lower(value);
      if (m == "label")
        cfg.distill_pool = DistillPool::labeled;
      else if (m == "unlabel")
        cfg.distill_pool = DistillPool::unlabeled;
      else if (m == "label+unlabel" || m == "both")
        cfg.distill_pool = DistillPool::both;
      else
        raise(Errc::config_error, "config: distill_pool must be label, unlabel or label+unlabel");
    } else if (key == "train.student_width_multiplier") {
      cfg.student_width_multiplier = static_cast<int>(to_long(value, key));
    } else if (key == "experiment.task") {
      std::string m = lower(value);
      if (m == "popularity")
        cfg.task = Task::popularity;
      else if (m == "outbreak")
        cfg.task = Task::outbreak;
      else
        raise(Errc::config_error, "config: task must be popularity or outbreak");
    } else if (key == "experiment.phases") {
      cfg.phases = PhasePlan{false, false, false, false};
      for (const std::string& p : split_list(lower(value))) {
        if (p == "pretrain")
          cfg.phases.pretrain = true;
        else if (p == "finetune")
          cfg.phases.finetune = true;
        else if (p == "distill")
          cfg.phases.distill = true;
        else if (p == "eval")
          cfg.phases.eval = true;
        else
          raise(Errc::config_error, "config: unknown phase '" + p + "'");
      }
    } else if (key == "experiment.label_fraction") {
      cfg.label_frac = to_double(value, key);
    } else if (key == "experiment.seeds") {
      cfg.seeds.clear();
      for (const std::string& s : split_list(value))
        cfg.seeds.push_back(static_cast<uint64_t>(to_long(s, key)));
    } else if (key == "experiment.out_dir") {
      cfg.out_dir = value;
    } else if (key == "experiment.init_checkpoint") {
      cfg.init_checkpoint = value;
    } else if (key == "experiment.teacher_checkpoint") {
      cfg.teacher_checkpoint = value;
    } else {
      raise(Errc::config_error, "config: unknown key '" + key + "'");
    }
  }
}

std::string write_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "[data]\n";
  if (!cfg.data_paths.empty()) os << "path = " << join(cfg.data_paths) << "\n";
  if (cfg.target_dataset >= 0) os << "target = " << cfg.target_dataset << "\n";
  os << "t_o = " << format_double_cfg(cfg.data.window.t_o) << "\n";
  os << "t_p = " << format_double_cfg(cfg.data.window.t_p) << "\n";
  os << "min_observed_nodes = " << cfg.data.min_observed_nodes << "\n";
  os << "max_observed_nodes = " << cfg.data.max_observed_nodes << "\n";
  os << "dataset_end_time = " << format_double_cfg(cfg.data.dataset_end_time) << "\n";
  os << "train_fraction = " << format_double_cfg(cfg.data.train_fraction) << "\n";
  os << "val_fraction = " << format_double_cfg(cfg.data.val_fraction) << "\n";
  os << "test_fraction = " << format_double_cfg(cfg.data.test_fraction) << "\n";
  os << "seed = " << cfg.data.seed << "\n";
  os << "\n[synth]\n";
  os << "cascades = " << cfg.synth_cascades << "\n";
  os << "branching_mean = " << format_double_cfg(cfg.synth.branching_mean) << "\n";
  os << "time_rate = " << format_double_cfg(cfg.synth.time_rate) << "\n";
  os << "max_size = " << cfg.synth.max_size << "\n";
  os << "\n[encoder]\n";
  os << "feature_mode = " << (cfg.encoder.features.mode == FeatureMode::wavelet ? "wavelet" : "structural")
     << "\n";
  os << "wavelet_scale = " << format_double_cfg(cfg.encoder.features.wavelet_scale) << "\n";
  os << "wavelet_samples = " << cfg.encoder.features.wavelet_samples << "\n";
  os << "wavelet_t_max = " << format_double_cfg(cfg.encoder.features.wavelet_t_max) << "\n";
  os << "embedding_dim = " << cfg.encoder.embedding_dim << "\n";
  os << "base_width = " << cfg.encoder.base_width << "\n";
  os << "model_size = " << cfg.encoder.width_multiplier << "\n";
  os << "head_design = " << cfg.encoder.head_depth << "-" << cfg.encoder.finetune_layer << "\n";
  os << "\n[augment]\n";
  os << "strategy = "
     << (cfg.augment.strategy == AugStrategy::aug_sim
             ? "augsim"
             : cfg.augment.strategy == AugStrategy::aug_rwr ? "augrwr" : "augsim+augrwr")
     << "\n";
  os << "eta = " << format_double_cfg(cfg.augment.sim.eta) << "\n";
  os << "theta_t = " << format_double_cfg(cfg.augment.sim.theta_t) << "\n";
  os << "lambda = " << format_double_cfg(cfg.augment.sim.lambda) << "\n";
  os << "fit_lambda = " << (cfg.fit_lambda ? "true" : "false") << "\n";
  os << "strength_mode = "
     << (cfg.augment.sim.strength_mode == StrengthMode::per_node ? "per_node" : "absolute") << "\n";
  os << "restart_prob = " << format_double_cfg(cfg.augment.rwr.restart_prob) << "\n";
  os << "walk_budget = " << format_double_cfg(cfg.augment.rwr.walk_budget_factor) << "\n";
  os << "\n[train]\n";
  os << "batch_size = " << cfg.batch_size << "\n";
  os << "temperature = " << format_double_cfg(cfg.temperature) << "\n";
  os << "pretrain_epochs = " << cfg.pretrain_epochs << "\n";
  os << "finetune_epochs = " << cfg.finetune_epochs << "\n";
  os << "distill_epochs = " << cfg.distill_epochs << "\n";
  os << "patience = " << cfg.patience << "\n";
  os << "learning_rate = " << format_double_cfg(cfg.learning_rate) << "\n";
  os << "use_unlabeled = " << (cfg.use_unlabeled ? "true" : "false") << "\n";
  os << "freeze_encoder = " << (cfg.freeze_encoder ? "true" : "false") << "\n";
  os << "distill_pool = "
     << (cfg.distill_pool == DistillPool::labeled
             ? "label"
             : cfg.distill_pool == DistillPool::unlabeled ? "unlabel" : "label+unlabel")
     << "\n";
  os << "student_width_multiplier = " << cfg.student_width_multiplier << "\n";
  os << "\n[experiment]\n";
  os << "task = " << (cfg.task == Task::outbreak ? "outbreak" : "popularity") << "\n";
  std::vector<std::string> phases;
  if (cfg.phases.pretrain) phases.push_back("pretrain");
  if (cfg.phases.finetune) phases.push_back("finetune");
  if (cfg.phases.distill) phases.push_back("distill");
  if (cfg.phases.eval) phases.push_back("eval");
  os << "phases = " << join(phases) << "\n";
  os << "label_fraction = " << format_double_cfg(cfg.label_frac) << "\n";
  std::vector<std::string> seeds;
  for (uint64_t s : cfg.seeds) seeds.push_back(std::to_string(s));
  os << "seeds = " << join(seeds) << "\n";
  if (!cfg.out_dir.empty()) os << "out_dir = " << cfg.out_dir << "\n";
  if (!cfg.init_checkpoint.empty()) os << "init_checkpoint = " << cfg.init_checkpoint << "\n";
  if (!cfg.teacher_checkpoint.empty()) os << "teacher_checkpoint = " << cfg.teacher_checkpoint << "\n";
  return os.str();
}

}  // namespace caslearn
