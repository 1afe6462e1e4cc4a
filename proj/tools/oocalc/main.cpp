#include "oocalc/difftest.hpp"
#include "oocalc/driver.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw oocalc::DriverError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

oocalc::SourceUnit load_unit(const std::string& path) {
  return oocalc::classify_setters(oocalc::parse(slurp(path)));
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"oocalc: verified object-program calculator"};
  app.require_subcommand(1);

  std::string file, routine, trace_path, heap_path, at_label, query;
  std::string rules_arg = "all";
  std::uint64_t seed = 0;
  int cases = 1000, max_objects = 6;

  auto* prove_cmd = app.add_subcommand("prove", "prove a routine's contracts");
  prove_cmd->add_option("file", file)->required();
  prove_cmd->add_option("--routine", routine)->required();
  prove_cmd->add_option("--trace", trace_path);

  auto* run_cmd = app.add_subcommand("run", "execute a routine on a heap file");
  run_cmd->add_option("file", file)->required();
  run_cmd->add_option("--routine", routine)->required();
  run_cmd->add_option("--heap", heap_path)->required();

  auto* alias_cmd = app.add_subcommand("alias", "alias query at a label");
  alias_cmd->add_option("file", file)->required();
  alias_cmd->add_option("--routine", routine)->required();
  alias_cmd->add_option("--at", at_label)->required();
  alias_cmd->add_option("--query", query)->required();

  auto* diff_cmd =
      app.add_subcommand("difftest", "differential rule validation");
  diff_cmd->add_option("--rules", rules_arg);
  diff_cmd->add_option("--seed", seed);
  diff_cmd->add_option("--cases", cases);
  diff_cmd->add_option("--max-objects", max_objects);

  try {
    app.parse(argc, argv);

    if (prove_cmd->parsed()) {
      auto unit = load_unit(file);
      auto v = oocalc::prove(unit, routine);
      std::string text = v.render();
      std::cout << text;
      if (!trace_path.empty()) {
        std::ofstream out(trace_path);
        if (!out) throw oocalc::DriverError("cannot write '" + trace_path + "'");
        out << text;
      }
      return v.exit_code();
    }

    if (run_cmd->parsed()) {
      auto unit = load_unit(file);
      auto rep = oocalc::run_routine(unit, routine, slurp(heap_path));
      std::cout << rep.render();
      return rep.ok ? 0 : 1;
    }

    if (alias_cmd->parsed()) {
      auto unit = load_unit(file);
      std::string ans = oocalc::alias_query(unit, routine, at_label, query);
      std::cout << ans << "\n";
      return (ans == "NEVER" || ans == "YES") ? 0 : 1;
    }

    // difftest
    oocalc::DiffOptions opt;
    opt.seed = seed;
    opt.cases = cases;
    opt.max_objects = max_objects;
    if (rules_arg != "all") {
      std::stringstream ss(rules_arg);
      std::string name;
      while (std::getline(ss, name, ',')) {
        auto r = oocalc::rule_from_name(name);
        if (!r) throw oocalc::DriverError("unknown rule '" + name + "'");
        opt.rules.push_back(*r);
      }
    }
    auto rep = oocalc::run_difftest(opt);
    std::cout << rep.render();
    return rep.total_failed == 0 ? 0 : 1;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;
  } catch (const oocalc::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const oocalc::DriverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
