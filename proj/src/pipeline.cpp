#include "gemini/pipeline.hpp"

#include <fmt/format.h>

#include "gemini/eval.hpp"
#include "gemini/hw.hpp"
#include "gemini/infer.hpp"
#include "gemini/lexer.hpp"
#include "gemini/parser.hpp"
#include "gemini/stdlib.hpp"
#include "gemini/verilog.hpp"

namespace gemini {

std::string path_stem(const std::string& path) {
  size_t slash = path.find_last_of('/');
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  size_t dot = base.find_last_of('.');
  return dot == std::string::npos || dot == 0 ? base : base.substr(0, dot);
}

namespace {

// Walks declarations printing each binder with its final rendered type.
void typed_tree(const Expr& e, int depth, std::string& out) {
  std::string indent(static_cast<size_t>(depth) * 2, ' ');
  if (e.kind == Expr::Kind::Let) {
    for (const auto& d : e.decs) {
      const char* kind = nullptr;
      switch (d.kind) {
        case Dec::Kind::Val: kind = "val"; break;
        case Dec::Kind::Fun: kind = "fun"; break;
        case Dec::Kind::Module: kind = "module"; break;
        case Dec::Kind::Type: kind = "type"; break;
        case Dec::Kind::Datatype: kind = d.hardware ? "hdatatype" : "sdatatype"; break;
      }
      out += fmt::format("{}{} {} : {}\n", indent, kind, d.name,
                         d.sem_type ? render_type(d.sem_type) : "?");
      if (d.rhs) typed_tree(*d.rhs, depth + 1, out);
      if (d.body) typed_tree(*d.body, depth + 1, out);
    }
  }
  for (const auto& item : e.items)
    if (item) typed_tree(*item, depth, out);
  for (const auto& [label, sub] : e.fields) typed_tree(*sub, depth, out);
  for (const auto& [pat, body] : e.arms) typed_tree(*body, depth, out);
}

}  // namespace

CompileResult compile_source(const std::string& origin, const std::string& text,
                             const CompileOptions& options) {
  CompileResult result;
  SourceFile file(origin, text);

  auto finished = [&](const std::string& stage) { return options.emit == stage; };
  auto failed = [&]() {
    return result.diags.has_errors() ||
           (options.warnings_as_errors && !result.diags.all().empty());
  };

  // Lexing.
  std::vector<Token> tokens = tokenize(file, result.diags);
  if (finished("tokens")) {
    result.emitted = dump_tokens(tokens);
    result.ok = !failed();
    return result;
  }
  if (result.diags.has_errors()) return result;

  // Parsing and desugaring.
  ExprPtr program = parse_program(tokens, result.diags);
  if (!program || result.diags.has_errors()) return result;
  desugar(*program);
  if (finished("ast")) {
    result.emitted = to_sexpr(*program) + "\n";
    result.ok = !failed();
    return result;
  }

  // Semantic analysis.
  MetaSource fresh;
  SubstEnv subst;
  Analyzer analyzer(result.diags, fresh, subst);
  analyzer.substitution_cap = options.substitution_cap;
  install_stdlib_types(analyzer, fresh);
  TypePtr program_type;
  try {
    program_type = analyzer.analyze(*program, /*require_module=*/true);
  } catch (const InternalError& err) {
    result.diags.error(Code::Internal, program->span, err.what());
    return result;
  }
  result.program_type = program_type;
  if (finished("typed-ast")) {
    std::string out;
    typed_tree(*program, 0, out);
    out += fmt::format("program : {}\n", render_type(program_type));
    result.emitted = out;
    result.ok = !failed();
    return result;
  }
  if (result.diags.has_errors()) return result;

  // Staging: evaluate every software expression at compile time.
  EvalContext ctx;
  ctx.subst = &subst;
  ctx.print_sink = &result.staging_output;
  ctx.source_dir = options.source_dir;
  ctx.substitution_cap = options.substitution_cap;
  ExpandedModule expanded;
  try {
    EnvPtr env = install_stdlib_values(nullptr);
    ValuePtr program_value = evaluate(ctx, *program, env);
    check_program_module(program_value);
    expanded = expand_top_module(ctx, program_value, program->span);
  } catch (const EvalError& err) {
    result.diags.error(err.code, err.span, err.message);
    return result;
  } catch (const HwError& err) {
    result.diags.error(err.code, program->span, err.message);
    return result;
  } catch (const InternalError& err) {
    result.diags.error(Code::Internal, program->span, err.what());
    return result;
  }

  // Hardware checking, lowering, emission.
  try {
    Netlist netlist = netlist_from_value(expanded);
    hw_typecheck(netlist);
    if (finished("ir")) {
      result.emitted = render_netlist(netlist);
      result.ok = !failed();
      return result;
    }
    Netlist lowered = lower_records(netlist);
    hw_typecheck(lowered);
    if (finished("ir-lowered")) {
      result.emitted = render_netlist(lowered);
      result.ok = !failed();
      return result;
    }
    std::string module_name =
        options.module_name.empty() ? path_stem(origin) : options.module_name;
    result.verilog = emit_verilog(lowered, module_name);
    result.lowered = std::move(lowered);
    if (finished("verilog")) result.emitted = result.verilog;
  } catch (const HwError& err) {
    result.diags.error(err.code, program->span, err.message);
    return result;
  } catch (const EvalError& err) {
    result.diags.error(err.code, err.span, err.message);
    return result;
  }

  result.ok = !failed();
  return result;
}

}  // namespace gemini
