#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tropic/compiler.hpp"
#include "tropic/eval.hpp"
#include "tropic/machines.hpp"
#include "tropic/surface.hpp"
#include "tropic/tiering.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerification = 1;
constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitResource = 4;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string show(const tropic::Word& w) { return w.empty() ? "eps" : w.bits(); }

struct LoadedProgram {
  tropic::SurfaceProgram surface;
  tropic::Lowered lowered;
};

LoadedProgram load_program(const std::string& path) {
  LoadedProgram lp;
  lp.surface = tropic::parse(read_file(path));
  lp.lowered = tropic::lower(lp.surface);
  return lp;
}

tropic::Word parse_input_word(const std::string& bits) {
  if (bits == "eps" || bits.empty()) return tropic::Word();
  return tropic::Word::from_bits(bits);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tropic: pointer-recursion function algebras, tiering and RATM tooling"};
  app.require_subcommand(1);

  std::string file, input_bits, entry_override, count_name, out_path, manifest_path, fn_name,
      target_str = "l";
  std::uint64_t fuel = 50'000'000;
  std::uint64_t max_steps = 100'000;
  std::uint64_t depth = 0;
  std::uint64_t max_tuples = 2'000'000;
  long long input_len = -1;
  int max_len = 6;

  auto* c_check = app.add_subcommand("check", "parse and scheme-check a program");
  c_check->add_option("file", file)->required();

  auto* c_tier = app.add_subcommand("tier", "infer tier signatures");
  c_tier->add_option("file", file)->required();
  c_tier->add_option("--input", input_bits, "computation input (fixes the Offset)");
  c_tier->add_option("--input-len", input_len, "computation input length");

  auto* c_classify = app.add_subcommand("classify", "name the algebra class");
  c_classify->add_option("file", file)->required();

  auto* c_run = app.add_subcommand("run", "evaluate the entry function");
  c_run->add_option("file", file)->required();
  c_run->add_option("--input", input_bits)->required();
  c_run->add_option("--fuel", fuel);
  c_run->add_option("--entry", entry_override);
  c_run->add_option("--count", count_name, "count applications of this definition");

  auto* c_vb = app.add_subcommand("verify-bound", "exhaustive size-bound check");
  c_vb->add_option("file", file)->required();
  c_vb->add_option("--max-len", max_len);
  c_vb->add_option("--input", input_bits);
  c_vb->add_option("--fn", fn_name, "check one function (default: all tiered)");
  c_vb->add_option("--fuel", fuel);
  c_vb->add_option("--max-tuples", max_tuples);

  auto* c_sim = app.add_subcommand("simulate", "run a machine file");
  c_sim->add_option("file", file)->required();
  c_sim->add_option("--input", input_bits)->required();
  c_sim->add_option("--max-steps", max_steps);
  c_sim->add_option("--depth", depth, "alternation depth (alternating machines)");

  auto* c_compile = app.add_subcommand("compile", "emit a program from a machine");
  c_compile->add_option("file", file)->required();
  c_compile->add_option("--target", target_str)->check(CLI::IsMember({"l", "lp", "p", "nc"}));
  c_compile->add_option("-o,--output", out_path);
  c_compile->add_option("--manifest", manifest_path);

  auto* c_equiv = app.add_subcommand("equiv", "cross-check compiled program vs simulator");
  c_equiv->add_option("file", file)->required();
  c_equiv->add_option("--target", target_str)->check(CLI::IsMember({"l", "lp", "p", "nc"}));
  c_equiv->add_option("--max-len", max_len);
  c_equiv->add_option("--fuel", fuel);

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_check->parsed()) {
      auto lp = load_program(file);
      auto check = tropic::check_schemes(lp.surface);
      for (const auto& [name, label] : check.labels)
        std::cout << name << ": " << tropic::label_name(label) << "\n";
      for (const auto& e : check.errors) std::cout << "ERROR " << e << "\n";
      return check.ok ? kExitOk : kExitParse;
    }

    if (c_tier->parsed()) {
      auto lp = load_program(file);
      long long off = input_len >= 0 ? input_len
                      : !input_bits.empty()
                          ? static_cast<long long>(parse_input_word(input_bits).size())
                          : 0;
      auto tiers = tropic::infer_program(lp.lowered.program,
                                         static_cast<long long>(tropic::encode(off).size()));
      bool all = true;
      for (const auto& [name, v] : tiers.verdicts) {
        std::cout << tropic::tier_line(name, v) << "\n";
        if (std::holds_alternative<tropic::Untierable>(v)) all = false;
      }
      return all ? kExitOk : kExitVerification;
    }

    if (c_classify->parsed()) {
      auto lp = load_program(file);
      auto check = tropic::check_schemes(lp.surface);
      if (!check.ok) {
        for (const auto& e : check.errors) std::cout << "ERROR " << e << "\n";
        return kExitParse;
      }
      std::cout << tropic::class_name(tropic::classify(check)) << "\n";
      return kExitOk;
    }

    if (c_run->parsed()) {
      auto lp = load_program(file);
      tropic::ComputationInput input{parse_input_word(input_bits)};
      tropic::EvalOptions opt;
      opt.fuel = fuel;
      opt.max_word_len = tropic::default_word_guard();
      opt.count_name = count_name;
      std::string entry = entry_override.empty() ? lp.lowered.program.entry : entry_override;
      int id = lp.lowered.program.find(entry);
      std::vector<tropic::Word> args;
      int arity = id >= 0 ? lp.lowered.program.defs[static_cast<std::size_t>(id)].arity : 1;
      if (arity == 1) {
        args.push_back(tropic::encode(input.n()));  // the Offset
      } else if (arity != 0) {
        std::cout << "ERROR entry must take zero arguments or the offset\n";
        return kExitUsage;
      }
      auto [out, metrics] = tropic::eval_with_metrics(lp.lowered.program, entry, args, input, opt);
      if (out.ok()) {
        std::cout << "output=" << show(out.value) << "\n";
      } else if (out.kind == tropic::OutcomeKind::Diverged) {
        std::cout << "output=DIVERGED\n";
      } else {
        std::cout << "output=ERROR " << out.error << "\n";
      }
      std::cout << "scheme_steps=" << metrics.scheme_steps << "\n"
                << "basic_calls=" << metrics.basic_calls << "\n"
                << "max_word_len=" << metrics.max_word_len << "\n";
      if (!count_name.empty())
        std::cout << "next_applications=" << metrics.next_applications << "\n";
      if (out.ok()) return kExitOk;
      return out.kind == tropic::OutcomeKind::Diverged ? kExitResource : kExitResource;
    }

    if (c_vb->parsed()) {
      auto lp = load_program(file);
      tropic::ComputationInput input{parse_input_word(input_bits)};
      auto tiers = tropic::infer_program(lp.lowered.program,
                                         static_cast<long long>(tropic::encode(input.n()).size()));
      std::vector<std::string> names;
      if (!fn_name.empty()) {
        names.push_back(fn_name);
      } else {
        for (const auto& [name, v] : tiers.verdicts)
          if (std::holds_alternative<tropic::TierSignature>(v)) names.push_back(name);
      }
      bool ok = true;
      for (const auto& name : names) {
        auto rep = tropic::verify_bound(lp.lowered.program, name, input, max_len, fuel,
                                        tiers.env, nullptr, max_tuples);
        if (rep.ok) {
          std::cout << "OK " << name << " tuples=" << rep.checked
                    << " max_len=" << rep.used_max_len;
          if (rep.diverged || rep.guarded)
            std::cout << " diverged=" << rep.diverged << " guarded=" << rep.guarded;
          std::cout << "\n";
        } else {
          ok = false;
          for (const auto& v : rep.violations) {
            std::cout << tropic::violation_line(name, v) << "\n";
            break;
          }
        }
      }
      return ok ? kExitOk : kExitVerification;
    }

    if (c_sim->parsed()) {
      tropic::Machine m = tropic::parse_machine(read_file(file));
      tropic::ComputationInput input{parse_input_word(input_bits)};
      if (m.alternating) {
        std::uint64_t d = depth ? depth : input.n();
        bool acc = tropic::run_alternating(m, input, d);
        std::cout << "status=" << (acc ? "accept" : "reject") << "\n"
                  << "depth=" << d << "\n";
        return kExitOk;
      }
      auto r = tropic::run(m, input, max_steps);
      std::cout << "status="
                << (r.status == tropic::HaltStatus::Accept   ? "accept"
                    : r.status == tropic::HaltStatus::Reject ? "reject"
                                                             : "out-of-fuel")
                << "\n"
                << "output=" << show(r.output) << "\n"
                << "steps=" << r.steps << "\n"
                << "max_space=" << r.max_space << "\n";
      return kExitOk;
    }

    if (c_compile->parsed()) {
      tropic::Machine m = tropic::parse_machine(read_file(file));
      auto target = *tropic::target_by_name(target_str);
      tropic::CompiledProgram cp =
          (target == tropic::CompileTarget::L || target == tropic::CompileTarget::LP)
              ? tropic::compile_ratm(m, target)
              : tropic::compile_alternating(m, target);
      if (out_path.empty()) {
        std::cout << cp.text;
      } else {
        std::ofstream out(out_path, std::ios::binary);
        out << cp.text;
      }
      if (!manifest_path.empty()) {
        std::ofstream mf(manifest_path, std::ios::binary);
        mf << tropic::manifest_text(cp);
      }
      return kExitOk;
    }

    if (c_equiv->parsed()) {
      tropic::Machine m = tropic::parse_machine(read_file(file));
      auto target = *tropic::target_by_name(target_str);
      auto rep = tropic::check_equivalence(m, target, max_len, fuel);
      if (rep.ok) {
        std::cout << "OK " << rep.checked << "/" << rep.checked << " inputs\n";
        return kExitOk;
      }
      std::cout << "FAIL " << (rep.checked - rep.mismatches) << "/" << rep.checked
                << " inputs\n";
      for (const auto& f : rep.failures) std::cout << "  " << f << "\n";
      return kExitVerification;
    }
  } catch (const tropic::ParseError& e) {
    std::cerr << "parse error at " << e.line << ":" << e.col << ": " << e.what() << "\n";
    return kExitParse;
  } catch (const tropic::MachineError& e) {
    std::cerr << "machine error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  return kExitUsage;
}
