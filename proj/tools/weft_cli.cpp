#include <CLI11.hpp>

#include <iostream>

#include "weft/control/placement.hpp"
#include "weft/harness/runner.hpp"
#include "weft/model/io.hpp"
#include "weft/model/sla.hpp"

namespace {

using namespace weft;

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kFailed = 3;

bool is_validation(Errc c) {
  switch (c) {
    case Errc::InvalidArgument:
    case Errc::UnknownParent:
    case Errc::DuplicateMember:
    case Errc::UnknownHandler:
    case Errc::DanglingTriggerSource:
    case Errc::EventKindMismatch:
    case Errc::TriggerCycle:
    case Errc::InvalidSla:
    case Errc::UnknownMember:
    case Errc::UnknownDatacenter:
    case Errc::InvalidPartition:
    case Errc::OverlapWithExistingPartition:
    case Errc::DecodeError:
    case Errc::ScriptError:
    case Errc::IoError:
      return true;
    default:
      return false;
  }
}

int report_error(const Error& e) {
  std::cerr << "error [" << errc_name(e.code()) << "]: " << e.what() << "\n";
  return is_validation(e.code()) ? kInvalid : kFailed;
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, const std::string& out,
            const std::string& format) {
  const auto fmt = harness::parse_format(format);
  const auto sc = harness::load_scenario(path);
  harness::RunResult res;
  try {
    res = harness::run_scenario(sc, {seed});
  } catch (const Error& e) {
    std::cerr << "error [" << errc_name(e.code()) << "]: " << e.what() << "\n";
    return kFailed;
  }
  if (out.empty()) {
    std::cout << harness::render(res.report, fmt);
  } else {
    harness::export_report(res.report, out, fmt);
  }
  const auto& r = res.report;
  std::cerr << sc.name << ": " << r.invocations << " invocations, " << r.ryw_violations << " ryw violations, "
            << r.gate_violations << " gate violations, raft " << (r.raft_safe ? "safe" : "UNSAFE") << ", "
            << r.corrections.size() << " corrections\n";
  return kOk;
}

int cmd_validate(const std::string& path) {
  const auto cls = harness::load_class(path);
  std::cout << "ok " << cls.name << " (" << model::consistency_name(cls.class_sla.consistency.kind) << ", "
            << cls.attributes.size() << " attributes, " << cls.functions.size() << " functions, "
            << cls.triggers.size() << " triggers)\n";
  return kOk;
}

int cmd_plan(const std::string& path, const std::string& dcs) {
  const auto cls = harness::load_class(path);
  const auto profiles = model::load_profiles_file(dcs);
  control::Rotation rot;
  control::PlacementPlan plan;
  try {
    plan = control::place_class(cls, profiles, {}, rot);
  } catch (const Error& e) {
    std::cerr << "error [" << errc_name(e.code()) << "]: " << e.what() << "\n";
    return kFailed;
  }
  nlohmann::json j{{"class", plan.cls},
                   {"replicas", plan.replicas},
                   {"k", plan.k},
                   {"reserved", plan.reserved},
                   {"target", plan.target},
                   {"required_k", plan.required_k},
                   {"failure_probs", plan.failure_probs}};
  std::cout << j.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weft: distributed object runtime on a simulated network"};
  app.require_subcommand(1);

  std::string scenario, out, format = "json";
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run a scenario and export its metrics");
  run->add_option("scenario", scenario, "Scenario file")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", out, "Write the report here instead of stdout");
  run->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  std::string class_file;
  auto* validate = app.add_subcommand("validate", "Check a class file");
  validate->add_option("class-file", class_file, "Class file")->required();

  std::string plan_class, dcs;
  auto* plan = app.add_subcommand("plan", "Show the placement of a class");
  plan->add_option("class-file", plan_class, "Class file")->required();
  plan->add_option("--dcs", dcs, "Datacenter profile file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    if (*run) return cmd_run(scenario, seed, out, format);
    if (*validate) return cmd_validate(class_file);
    if (*plan) return cmd_plan(plan_class, dcs);
  } catch (const Error& e) {
    return report_error(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kOk;
}
