#include "pguard/bench.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pguard/monitor.hpp"
#include "pguard/pipeline.hpp"

namespace pguard {
namespace {

std::uint64_t now_ns() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

// A body full of marked divs, data-slot values cycling over the extension
// count so every synthetic victim finds targets of its own.
DomTree make_bench_dom(std::mt19937_64& rng, std::size_t nodes, std::size_t n_ext) {
  DomNode body = make_element("body");
  std::size_t count = 2;  // html + body
  std::size_t marker = 0;
  std::uniform_int_distribution<int> extra(0, 2);
  while (count + 1 <= nodes) {
    DomNode div = make_element("div");
    set_attribute(div, "data-slot", std::to_string(marker % std::max<std::size_t>(n_ext, 1)));
    ++marker;
    ++count;
    int kids = extra(rng);
    for (int j = 0; j < kids && count + 2 <= nodes; ++j) {
      DomNode p = make_element("p");
      p.children.push_back(make_text("t" + std::to_string(j)));
      count += 2;
      div.children.push_back(std::move(p));
    }
    body.children.push_back(std::move(div));
  }
  DomNode html = make_element("html");
  html.children.push_back(std::move(body));
  return DomTree{std::move(html)};
}

// Insert-only victims, one per data-slot value.
Registry make_bench_registry(std::size_t n_ext) {
  Registry r;
  for (std::size_t i = 0; i < n_ext; ++i) {
    Extension e;
    e.manifest.extension_id = "bench:" + std::to_string(i);
    e.manifest.run_at = RunAt::DocumentIdle;
    e.manifest.phase = Phase::Bubble;
    e.manifest.install_time = i;
    Rule rule;
    rule.selector.kind = Selector::Kind::ByAttribute;
    rule.selector.attr_name = "data-slot";
    rule.selector.attr_value = std::to_string(i);
    rule.action.kind = Action::Kind::InsertChild;
    rule.action.subtree = make_element("span");
    set_attribute(rule.action.subtree, "data-by", e.manifest.extension_id);
    rule.scope = RuleScope::AllMatches;
    e.program.rules.push_back(std::move(rule));
    r.add(std::move(e));
  }
  return r;
}

std::uint64_t median(std::vector<std::uint64_t> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

std::size_t read_vm_hwm_kb() {
  std::ifstream in("/proc/self/status");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      std::istringstream fields(line.substr(6));
      std::size_t kb = 0;
      fields >> kb;
      return kb;
    }
  }
  return 0;
}

}  // namespace

BenchSummary run_bench(const BenchConfig& cfg) {
  BenchSummary summary;
  std::vector<std::size_t> sizes;
  sizes.push_back(cfg.dom_min);
  if (cfg.dom_max > cfg.dom_min) {
    std::size_t mid = cfg.dom_min + (cfg.dom_max - cfg.dom_min) / 2;
    if (mid != cfg.dom_min && mid != cfg.dom_max) sizes.push_back(mid);
    sizes.push_back(cfg.dom_max);
  }

  for (std::size_t n = cfg.ext_min; n <= cfg.ext_max; ++n) {
    for (std::size_t nodes : sizes) {
      std::mt19937_64 rng(cfg.seed ^ (n * 1315423911u) ^ nodes);
      DomTree dom0 = make_bench_dom(rng, nodes, n);
      std::vector<std::uint64_t> unguarded_times;
      std::vector<std::uint64_t> guarded_times;
      for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
        Registry plain = make_bench_registry(n);
        std::uint64_t t0 = now_ns();
        run_pipeline(plain, dom0);
        unguarded_times.push_back(now_ns() - t0);

        GuardedRegistry g = guard(make_bench_registry(n));
        std::uint64_t t1 = now_ns();
        run_guarded(g, dom0);
        guarded_times.push_back(now_ns() - t1);
      }
      BenchPoint point;
      point.extensions = n;
      point.dom_nodes = nodes;
      point.slots = 2 * n + 1;
      point.unguarded_ns = median(std::move(unguarded_times));
      point.guarded_ns = median(std::move(guarded_times));
      summary.points.push_back(point);
    }
  }

  // Least squares of overhead vs extension count.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double count = static_cast<double>(summary.points.size());
  for (const BenchPoint& p : summary.points) {
    double x = static_cast<double>(p.extensions);
    double y = static_cast<double>(p.guarded_ns) - static_cast<double>(p.unguarded_ns);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double denom = count * sxx - sx * sx;
  if (denom != 0.0) {
    summary.slope_ns_per_extension = (count * sxy - sx * sy) / denom;
    summary.intercept_ns = (sy - summary.slope_ns_per_extension * sx) / count;
    double mean_y = sy / count;
    double ss_tot = 0, ss_res = 0;
    for (const BenchPoint& p : summary.points) {
      double x = static_cast<double>(p.extensions);
      double y = static_cast<double>(p.guarded_ns) - static_cast<double>(p.unguarded_ns);
      double fit = summary.slope_ns_per_extension * x + summary.intercept_ns;
      ss_tot += (y - mean_y) * (y - mean_y);
      ss_res += (y - fit) * (y - fit);
    }
    summary.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  }
  summary.peak_rss_kb = read_vm_hwm_kb();
  return summary;
}

std::string format_bench(const BenchSummary& summary) {
  std::ostringstream os;
  os << std::setw(4) << "ext" << std::setw(7) << "nodes" << std::setw(7) << "slots"
     << std::setw(14) << "unguarded_ns" << std::setw(12) << "guarded_ns" << std::setw(13)
     << "overhead_ns" << "\n";
  for (const BenchPoint& p : summary.points) {
    long long overhead =
        static_cast<long long>(p.guarded_ns) - static_cast<long long>(p.unguarded_ns);
    os << std::setw(4) << p.extensions << std::setw(7) << p.dom_nodes << std::setw(7) << p.slots
       << std::setw(14) << p.unguarded_ns << std::setw(12) << p.guarded_ns << std::setw(13)
       << overhead << "\n";
  }
  os << "fit slope " << std::fixed << std::setprecision(1) << summary.slope_ns_per_extension
     << " ns/extension intercept " << summary.intercept_ns << " ns r2 " << std::setprecision(4)
     << summary.r_squared << "\n";
  os << "peak_rss " << summary.peak_rss_kb << " kB\n";
  return os.str();
}

}  // namespace pguard
