#include "oocalc/difftest.hpp"
#include "oocalc/driver.hpp"

#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const oocalc::SourceUnit& reverse_unit() {
  static const oocalc::SourceUnit unit = oocalc::classify_setters(
      oocalc::parse(slurp(std::string(FIXTURES_DIR) + "/reverse.oo")));
  return unit;
}

void BM_Normalize(benchmark::State& state) {
  auto t = oocalc::parse_term_string(
      "rev(previous.integral(right)) ++ <<next>> ++ next.right.integral(right)"
      " = old(first.integral(right))");
  for (auto _ : state) benchmark::DoNotOptimize(oocalc::normalize(t));
}
BENCHMARK(BM_Normalize);

void BM_ProveReverse(benchmark::State& state) {
  const auto& unit = reverse_unit();
  for (auto _ : state) {
    auto v = oocalc::prove(unit, "reverse");
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_ProveReverse);

void BM_DifftestThroughput(benchmark::State& state) {
  oocalc::DiffOptions opt;
  opt.seed = 1;
  opt.cases = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto rep = oocalc::run_difftest(opt);
    benchmark::DoNotOptimize(rep);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DifftestThroughput)->Arg(320)->Arg(1280);

void BM_RunReverse(benchmark::State& state) {
  const auto& unit = reverse_unit();
  std::string heap = slurp(std::string(FIXTURES_DIR) + "/list5.heap");
  for (auto _ : state) {
    auto rep = oocalc::run_routine(unit, "reverse", heap);
    benchmark::DoNotOptimize(rep);
  }
}
BENCHMARK(BM_RunReverse);

} // namespace

BENCHMARK_MAIN();
