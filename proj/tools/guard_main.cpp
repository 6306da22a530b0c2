// guard — moderation CLI over the qguard C API.
//
//   guard classify     --config cfg.json --text "..." [--image f] [--threshold x] [--method m]
//   guard eval         --config cfg.json --dataset d.jsonl --out metrics.json
//   guard sweep        --config cfg.json --dataset d.jsonl [--out sweep.tsv]
//   guard export-graph --config cfg.json --text "..." --out graph.dot
//   guard serve        --config cfg.json
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage/config error, 3 indeterminate.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qguard/qguard.h"

namespace {

using nlohmann::json;

struct CommonArgs {
  std::string config_path;
  std::string questions_path;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

// Engine config = file contents with CLI overrides folded in.
std::string merged_config(const CommonArgs& args) {
  if (args.config_path.empty())
    throw std::runtime_error("--config is required (see configs/ for samples)");
  json cfg = json::parse(slurp(args.config_path));
  if (!args.questions_path.empty()) cfg["questions"] = args.questions_path;
  return cfg.dump();
}

struct EngineHandle {
  qguard_engine* engine = nullptr;
  ~EngineHandle() { qguard_engine_destroy(engine); }
};

int create_engine(const CommonArgs& args, EngineHandle& handle) {
  std::string cfg = merged_config(args);
  if (qguard_engine_create(cfg.c_str(), &handle.engine) != QGUARD_OK) {
    std::cerr << "error: " << qguard_last_error() << "\n";
    return 2;
  }
  return 0;
}

struct OwnedString {
  char* value = nullptr;
  ~OwnedString() { qguard_string_free(value); }
};

int run_classify(const CommonArgs& common, const std::string& text, const std::string& image,
                 std::optional<double> threshold, const std::string& method, bool include_report) {
  EngineHandle handle;
  if (int rc = create_engine(common, handle)) return rc;

  json request;
  request["text"] = text;
  if (!image.empty()) request["image_path"] = image;
  if (threshold) request["threshold"] = *threshold;
  if (!method.empty()) request["method"] = method;
  if (include_report) request["include_report"] = true;

  OwnedString response;
  std::string request_str = request.dump();
  qguard_status status = qguard_classify(handle.engine, request_str.c_str(), &response.value);
  if (status == QGUARD_ERR_INDETERMINATE) {
    std::cerr << "indeterminate: " << qguard_last_error() << "\n";
    std::cout << json{{"verdict", "indeterminate"}, {"reason", qguard_last_error()}}.dump() << "\n";
    return 3;
  }
  if (status != QGUARD_OK) {
    std::cerr << "error: " << qguard_last_error() << "\n";
    return status == QGUARD_ERR_INVALID_ARGUMENT || status == QGUARD_ERR_PARSE ? 2 : 1;
  }
  std::cout << response.value << "\n";
  return 0;
}

int run_eval(const CommonArgs& common, const std::string& dataset, const std::string& out_path) {
  EngineHandle handle;
  if (int rc = create_engine(common, handle)) return rc;

  OwnedString metrics;
  if (qguard_eval(handle.engine, dataset.c_str(), &metrics.value) != QGUARD_OK) {
    std::cerr << "error: " << qguard_last_error() << "\n";
    return 1;
  }
  if (out_path.empty()) {
    std::cout << metrics.value << "\n";
    return 0;
  }
  write_text(out_path, std::string(metrics.value) + "\n");

  // Plot-ready companions next to the metrics document.
  json m = json::parse(metrics.value);
  std::string prefix = out_path;
  if (auto dot = prefix.rfind(".json"); dot != std::string::npos && dot == prefix.size() - 5)
    prefix.resize(dot);
  auto dump_curve = [&](const char* key, const char* x, const char* y, const std::string& path) {
    if (!m.contains(key)) return;
    std::ostringstream t;
    t << x << '\t' << y << '\n';
    for (const auto& p : m.at(key)) t << p.at(x).dump() << '\t' << p.at(y).dump() << '\n';
    write_text(path, t.str());
  };
  dump_curve("roc_curve", "fpr", "tpr", prefix + ".roc.tsv");
  dump_curve("pr_curve", "recall", "precision", prefix + ".pr.tsv");
  dump_curve("sweep", "theta", "f1", prefix + ".sweep.tsv");
  std::cerr << "wrote " << out_path << " (+ .roc.tsv/.pr.tsv/.sweep.tsv)\n";
  return 0;
}

int run_sweep(const CommonArgs& common, const std::string& dataset, const std::string& out_path) {
  EngineHandle handle;
  if (int rc = create_engine(common, handle)) return rc;

  OwnedString metrics;
  if (qguard_eval(handle.engine, dataset.c_str(), &metrics.value) != QGUARD_OK) {
    std::cerr << "error: " << qguard_last_error() << "\n";
    return 1;
  }
  json m = json::parse(metrics.value);
  std::ostringstream t;
  t << "theta\tf1\n";
  for (const auto& p : m.at("sweep")) t << p.at("theta").dump() << '\t' << p.at("f1").dump() << '\n';
  t << "# best_theta=" << m.at("best_theta").dump() << " best_f1=" << m.at("best_f1").dump() << "\n";
  if (out_path.empty()) {
    std::cout << t.str();
  } else {
    write_text(out_path, t.str());
    std::cerr << "wrote " << out_path << "\n";
  }
  return 0;
}

int run_export_graph(const CommonArgs& common, const std::string& text, const std::string& image,
                     const std::string& out_path) {
  EngineHandle handle;
  if (int rc = create_engine(common, handle)) return rc;

  json request;
  request["text"] = text;
  if (!image.empty()) request["image_path"] = image;
  OwnedString dot;
  std::string request_str = request.dump();
  if (qguard_export_graph(handle.engine, request_str.c_str(), &dot.value) != QGUARD_OK) {
    std::cerr << "error: " << qguard_last_error() << "\n";
    return 1;
  }
  if (out_path.empty()) {
    std::cout << dot.value;
  } else {
    write_text(out_path, dot.value);
    std::cerr << "wrote " << out_path << "\n";
  }
  return 0;
}

int run_serve(const CommonArgs& common) {
  EngineHandle handle;
  if (int rc = create_engine(common, handle)) return rc;

  json cfg = json::parse(merged_config(common));
  std::cerr << "guard gateway listening on " << cfg.value("listen", "127.0.0.1:8787") << "\n";
  if (qguard_serve(handle.engine) != QGUARD_OK) {
    std::cerr << "error: " << qguard_last_error() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"guard — question-probing prompt moderation"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string text, image, method, dataset, out_path;
  std::optional<double> threshold;
  bool include_report = false;

  auto add_common = [&common](CLI::App* cmd) {
    cmd->add_option("--config", common.config_path, "engine config JSON file")->required();
    cmd->add_option("--questions", common.questions_path, "question set file (overrides config)");
  };

  auto* classify = app.add_subcommand("classify", "classify one input");
  add_common(classify);
  classify->add_option("--text", text, "input text");
  classify->add_option("--image", image, "input image file");
  classify->add_option("--threshold", threshold, "risk threshold override");
  classify->add_option("--method", method, "graph|avg|baseline");
  classify->add_flag("--include-report", include_report, "attach white-box rows");

  auto* eval = app.add_subcommand("eval", "score a labeled dataset and compute metrics");
  add_common(eval);
  eval->add_option("--dataset", dataset, "JSONL dataset")->required();
  eval->add_option("--out", out_path, "metrics JSON output path");

  auto* sweep = app.add_subcommand("sweep", "F1-vs-threshold sweep over a dataset");
  add_common(sweep);
  sweep->add_option("--dataset", dataset, "JSONL dataset")->required();
  sweep->add_option("--out", out_path, "TSV output path");

  auto* export_graph = app.add_subcommand("export-graph", "emit the filter graph as DOT");
  add_common(export_graph);
  export_graph->add_option("--text", text, "input text");
  export_graph->add_option("--image", image, "input image file");
  export_graph->add_option("--out", out_path, "DOT output path");

  auto* serve = app.add_subcommand("serve", "run the HTTP moderation gateway");
  add_common(serve);

  CLI11_PARSE(app, argc, argv);

  try {
    if (classify->parsed())
      return run_classify(common, text, image, threshold, method, include_report);
    if (eval->parsed()) return run_eval(common, dataset, out_path);
    if (sweep->parsed()) return run_sweep(common, dataset, out_path);
    if (export_graph->parsed()) return run_export_graph(common, text, image, out_path);
    if (serve->parsed()) return run_serve(common);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
