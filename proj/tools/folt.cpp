// folt — batch command surface for the first-order fragment toolkit.
//
// Subcommands: classify | to-bsr | to-unnested | skolemize | check-shape |
// to-monadic | decide | check-equiv | shrink | interpolate.
//
// Exit codes: 0 success; 1 negative verdict (unsat, not in fragment,
// counterexample, not entailed); 2 usage or parse error; 3 resource limit.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "folt/ast.hpp"
#include "folt/classify.hpp"
#include "folt/gaf_transform.hpp"
#include "folt/interpolate.hpp"
#include "folt/monadize.hpp"
#include "folt/normal.hpp"
#include "folt/parse.hpp"
#include "folt/shrink.hpp"
#include "folt/structure.hpp"
#include "folt/to_bsr.hpp"

using json = nlohmann::json;
using namespace folt;

namespace {

struct Options {
    bool as_json = false;
    bool no_timings = false;
    bool trace = false;
    int max_size = 3;
    int depth = 3;
    std::size_t clause_cap = 50000;
    std::size_t size_guard = 1000000;
    std::string fragment = "auto";
};

struct Report {
    std::string command;
    std::vector<std::string> inputs;
    json verdicts = json::object();
    std::vector<std::string> artifacts;
    std::vector<std::string> warnings;
    json timings = json::object();

    json to_json(bool with_timings) const {
        json j;
        j["command"] = command;
        j["inputs"] = inputs;
        j["verdicts"] = verdicts;
        j["artifacts"] = artifacts;
        j["warnings"] = warnings;
        if (with_timings) j["timings"] = timings;
        return j;
    }
};

class Timer {
  public:
    explicit Timer(Report& r, const std::string& label) : r_(r), label_(label) {
        start_ = std::chrono::steady_clock::now();
    }
    ~Timer() {
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start_)
                      .count();
        r_.timings[label_] = ms;
    }

  private:
    Report& r_;
    std::string label_;
    std::chrono::steady_clock::time_point start_;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        // '#' starts a comment line.
        if (!line.empty() && line[0] == '#') continue;
        out << line << '\n';
    }
    return out.str();
}

StandardFormSentence read_sentence(const std::string& path) {
    return normalize_standard_form(parse(read_file(path)));
}

// input.fol -> input<suffix> next to the input.
std::string artifact_path(const std::string& input, const std::string& suffix) {
    std::string stem = input;
    for (const char* ext : {".fol", ".json"}) {
        std::size_t n = std::string(ext).size();
        if (stem.size() > n && stem.substr(stem.size() - n) == ext) {
            stem = stem.substr(0, stem.size() - n);
            break;
        }
    }
    return stem + suffix;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (content.empty() || content.back() != '\n') out << '\n';
}

int finish(const Report& r, const Options& opt, int code) {
    if (opt.as_json) {
        std::cout << r.to_json(!opt.no_timings).dump(2) << '\n';
    } else {
        std::cout << r.command << ":";
        for (const auto& i : r.inputs) std::cout << ' ' << i;
        std::cout << '\n';
        for (auto it = r.verdicts.begin(); it != r.verdicts.end(); ++it)
            std::cout << "  " << it.key() << ": " << it.value().dump() << '\n';
        for (const auto& a : r.artifacts) std::cout << "  wrote " << a << '\n';
        for (const auto& w : r.warnings) std::cout << "  warning: " << w << '\n';
        if (!opt.no_timings)
            for (auto it = r.timings.begin(); it != r.timings.end(); ++it)
                std::cout << "  " << it.key() << ": " << it.value().dump() << " ms\n";
    }
    return code;
}

json literal_list(const std::vector<Literal>& lits, const std::set<int>& idx) {
    json a = json::array();
    for (int i : idx) a.push_back(serialize(lits[i].to_formula()));
    return a;
}

std::vector<std::vector<FormulaPtr>> partition_of(const GbsrAnalysis& a) {
    std::vector<std::vector<FormulaPtr>> parts;
    for (const auto& cls : a.atom_partition) {
        std::vector<FormulaPtr> p;
        for (int i : cls) p.push_back(a.atoms[i]);
        parts.push_back(std::move(p));
    }
    return parts;
}

// ---------------------------------------------------------------------------
// Subcommand bodies.  Each returns the process exit code.

int cmd_classify(const std::string& file, const Options& opt) {
    Report r;
    r.command = "classify";
    r.inputs = {file};
    StandardFormSentence s = read_sentence(file);
    {
        Timer t(r, "classify_ms");
        Classification c = classify(s);
        r.verdicts["fragments"] = std::vector<std::string>(c.fragments.begin(), c.fragments.end());
        r.verdicts["has_equality"] = c.has_equality;
        r.verdicts["has_functions"] = c.has_functions;
        r.verdicts["max_function_arity"] = c.max_function_arity;

        if (!c.has_functions) {
            GbsrAnalysis g = analyze_gbsr(s);
            json gj;
            gj["is_gbsr"] = g.is_gbsr;
            json L = json::object();
            for (std::size_t k = 1; k < g.L_res.size(); ++k)
                L[std::to_string(k)] = literal_list(g.literals, g.L_res[k]);
            L["0"] = literal_list(g.literals, g.L_res.empty() ? std::set<int>{} : g.L_res[0]);
            gj["residual_literal_sets"] = L;
            if (g.is_gbsr) {
                json parts = json::array();
                for (const auto& cls : g.atom_partition) {
                    json p = json::array();
                    for (int i : cls) p.push_back(serialize(g.atoms[i]));
                    parts.push_back(p);
                }
                gj["atom_partition"] = parts;
                gj["degree"] = degree(s, partition_of(g));
            } else if (g.witness_literal >= 0) {
                gj["witness"] = serialize(g.literals[g.witness_literal].to_formula());
            }
            r.verdicts["gbsr"] = gj;
        }

        GafAnalysis ga = analyze_gaf(s);
        json aj;
        aj["is_gaf"] = ga.is_gaf;
        json Lx = json::object();
        for (const auto& [x, lits] : ga.Lx) Lx[x] = literal_list(ga.literals, lits);
        Lx["(x-free)"] = literal_list(ga.literals, ga.L0);
        aj["per_variable_literal_sets"] = Lx;
        if (!ga.is_gaf) aj["witness"] = ga.witness;
        r.verdicts["gaf"] = aj;
    }
    return finish(r, opt, 0);
}

int cmd_to_bsr(const std::string& file, const Options& opt) {
    Report r;
    r.command = "to-bsr";
    r.inputs = {file};
    StandardFormSentence s = read_sentence(file);
    GbsrAnalysis a = analyze_gbsr(s);
    if (!a.is_gbsr) {
        r.verdicts["verdict"] = "not-GBSR";
        if (a.witness_literal >= 0)
            r.verdicts["witness"] = serialize(a.literals[a.witness_literal].to_formula());
        return finish(r, opt, 1);
    }
    TransformTrace trace;
    StandardFormSentence out;
    {
        Timer t(r, "transform_ms");
        out = gbsr_to_bsr(s, a, opt.trace ? &trace : nullptr);
    }
    std::string path = artifact_path(file, ".bsr.fol");
    write_file(path, serialize(*out.to_formula()));
    r.artifacts.push_back(path);
    r.verdicts["verdict"] = "ok";
    r.verdicts["result"] = serialize(*out.to_formula());
    if (opt.trace) {
        json stages = json::array();
        for (const auto& st : trace.stages)
            stages.push_back({{"block", st.j},
                              {"after_dnf", st.after_dnf},
                              {"after_exists", st.after_exists},
                              {"after_cnf", st.after_cnf},
                              {"after_forall", st.after_forall}});
        r.verdicts["trace"] = {{"stages", stages}, {"result", trace.result}};
    }
    return finish(r, opt, 0);
}

int cmd_to_unnested(const std::string& file, const Options& opt) {
    Report r;
    r.command = "to-unnested";
    r.inputs = {file};
    StandardFormSentence s = read_sentence(file);
    GafAnalysis a = analyze_gaf(s);
    if (!a.is_gaf) {
        r.verdicts["verdict"] = "not-GAF";
        r.verdicts["witness"] = a.witness;
        return finish(r, opt, 1);
    }
    UnnestTrace trace;
    FormulaPtr out;
    {
        Timer t(r, "transform_ms");
        out = gaf_unnest(s, a, opt.trace ? &trace : nullptr, opt.size_guard);
    }
    r.verdicts["verdict"] = "ok";
    r.verdicts["result"] = serialize(*out);
    if (opt.trace) {
        json stages = json::array();
        for (const auto& st : trace.stages)
            stages.push_back({{"block", st.j},
                              {"after_dnf", st.after_dnf},
                              {"after_exists", st.after_exists},
                              {"after_cnf", st.after_cnf},
                              {"after_forall", st.after_forall}});
        r.verdicts["trace"] = {{"stages", stages}, {"result", trace.result}};
    }
    return finish(r, opt, 0);
}

SkolemSentence skolem_of_file(const std::string& file) {
    return skolemize(to_nnf(parse(read_file(file))));
}

int cmd_skolemize(const std::string& file, const Options& opt) {
    Report r;
    r.command = "skolemize";
    r.inputs = {file};
    SkolemSentence sk;
    {
        Timer t(r, "skolemize_ms");
        sk = skolem_of_file(file);
    }
    r.verdicts["verdict"] = "ok";
    r.verdicts["prefix"] = sk.prefix;
    r.verdicts["matrix"] = serialize(sk.matrix);
    r.verdicts["result"] = serialize(*sk.to_formula());
    json syms = json::object();
    for (const auto& [sym, var] : sk.symbols) syms[sym] = var;
    r.verdicts["skolem_symbols"] = syms;
    return finish(r, opt, 0);
}

int cmd_check_shape(const std::string& file, const Options& opt) {
    Report r;
    r.command = "check-shape";
    r.inputs = {file};
    SkolemSentence sk = skolem_of_file(file);
    SkolemShapeReport rep = check_skolem_shape(sk);
    r.verdicts["unary_functions_only"] = rep.unary_functions_only;
    r.verdicts["atoms_single_variable"] = rep.atoms_single_variable;
    r.verdicts["terms_flat"] = rep.terms_flat;
    if (!rep.witness_function.empty()) r.verdicts["witness_function"] = rep.witness_function;
    if (!rep.witness_atom.empty()) r.verdicts["witness_atom"] = rep.witness_atom;
    if (!rep.witness_term.empty()) r.verdicts["witness_term"] = rep.witness_term;
    r.verdicts["verdict"] = rep.all_ok() ? "ok" : "shape-violation";
    return finish(r, opt, rep.all_ok() ? 0 : 1);
}

int cmd_to_monadic(const std::string& file, const Options& opt) {
    Report r;
    r.command = "to-monadic";
    r.inputs = {file};
    StandardFormSentence s = read_sentence(file);

    // The single-variable shape comes from the un-nesting step, so route GAF
    // sentences through it; anything already shaped goes straight through.
    FormulaPtr pre = s.to_formula();
    GafAnalysis a = analyze_gaf(s);
    if (a.is_gaf && !a.has_equality) {
        Timer t(r, "unnest_ms");
        pre = gaf_unnest(s, a, nullptr, opt.size_guard);
    }
    SkolemSentence sk;
    {
        Timer t(r, "skolemize_ms");
        sk = skolemize(to_nnf(pre));
    }
    SkolemShapeReport shape = check_skolem_shape(sk);
    if (!shape.all_ok()) {
        r.verdicts["verdict"] = "shape-violation";
        if (!shape.witness_function.empty()) r.verdicts["witness_function"] = shape.witness_function;
        if (!shape.witness_atom.empty()) r.verdicts["witness_atom"] = shape.witness_atom;
        if (!shape.witness_term.empty()) r.verdicts["witness_term"] = shape.witness_term;
        return finish(r, opt, 1);
    }
    MonadizationResult m;
    {
        Timer t(r, "monadize_ms");
        m = monadize(sk);
    }
    std::string path = artifact_path(file, ".mon.fol");
    write_file(path, serialize(*m.phi_out));
    r.artifacts.push_back(path);

    json table = json::array();
    for (std::size_t i = 0; i < m.closure.size(); ++i)
        table.push_back({{"predicate", m.closure.preds[i]},
                         {"atom", serialize(m.closure.atoms[i])}});
    r.verdicts["verdict"] = "ok";
    r.verdicts["atom_count"] = m.atoms.size();
    r.verdicts["closure_table"] = table;
    r.verdicts["closure_size"] = m.closure.size();
    r.verdicts["bridge_count"] = m.psi.size();
    r.verdicts["ground_bridge_count"] = m.psi_prime.size();
    r.verdicts["input_length"] = formula_len(*sk.to_formula());
    r.verdicts["output_length"] = formula_len(*m.phi_out);
    return finish(r, opt, 0);
}

int cmd_decide(const std::string& file, const Options& opt) {
    Report r;
    r.command = "decide";
    r.inputs = {file};
    StandardFormSentence s = read_sentence(file);
    Signature sig = signature_of(s);
    bool bsr_route = opt.fragment == "bsr" ||
                     (opt.fragment == "auto" && sig.functions.empty() &&
                      is_exists_forall_prefix(s));
    Verdict v;
    {
        Timer t(r, "decide_ms");
        if (bsr_route) {
            v = decide_bsr(s);
            r.verdicts["procedure"] = "bsr";
            r.verdicts["model_bound"] = bsr_model_bound(s);
        } else {
            v = decide_bounded(s.to_formula(), opt.max_size);
            r.verdicts["procedure"] = "bounded";
            r.verdicts["max_size"] = opt.max_size;
        }
    }
    switch (v.kind) {
        case Verdict::Sat: {
            r.verdicts["verdict"] = "Sat";
            r.verdicts["model_size"] = v.model->size;
            std::string path = artifact_path(file, ".model.json");
            write_file(path, structure_to_json(*v.model).dump(2));
            r.artifacts.push_back(path);
            return finish(r, opt, 0);
        }
        case Verdict::Unsat:
            r.verdicts["verdict"] = "Unsat";
            return finish(r, opt, 1);
        case Verdict::UnsatAtBound:
            r.verdicts["verdict"] = "UnsatAtBound";
            r.verdicts["bound"] = v.bound;
            return finish(r, opt, 1);
        default:
            r.verdicts["verdict"] = "Unknown";
            r.verdicts["bound"] = v.bound;
            return finish(r, opt, 1);
    }
}

int cmd_check_equiv(const std::string& a, const std::string& b, const Options& opt) {
    Report r;
    r.command = "check-equiv";
    r.inputs = {a, b};
    StandardFormSentence s1 = read_sentence(a);
    StandardFormSentence s2 = read_sentence(b);
    EquivalenceResult res;
    {
        Timer t(r, "check_ms");
        res = check_equivalence(s1, s2, opt.max_size);
    }
    r.verdicts["max_size"] = opt.max_size;
    if (res.pass) {
        r.verdicts["verdict"] = "pass";
        return finish(r, opt, 0);
    }
    r.verdicts["verdict"] = "counterexample";
    r.verdicts["counterexample"] = structure_to_json(*res.counterexample);
    return finish(r, opt, 1);
}

int cmd_shrink(const std::string& model_file, const std::string& sentence_file,
               const Options& opt) {
    Report r;
    r.command = "shrink";
    r.inputs = {model_file, sentence_file};
    StandardFormSentence s = read_sentence(sentence_file);
    FiniteStructure A = structure_from_json(json::parse(read_file(model_file)));
    ShrinkResult res;
    {
        Timer t(r, "shrink_ms");
        res = shrink(A, s);
    }
    std::string path = artifact_path(model_file, ".shrunk.model.json");
    write_file(path, structure_to_json(res.model).dump(2));
    r.artifacts.push_back(path);
    r.verdicts["verdict"] = "ok";
    r.verdicts["input_size"] = A.size;
    r.verdicts["output_size"] = res.model.size;
    r.verdicts["target_set"] = std::vector<int>(res.target.begin(), res.target.end());
    r.verdicts["degree"] = res.kappa;
    r.verdicts["strategy_bound"] = res.strategy_bound;
    r.verdicts["theorem_bound"] = res.theorem_bound;
    return finish(r, opt, 0);
}

int cmd_interpolate(const std::string& a, const std::string& b, const Options& opt) {
    Report r;
    r.command = "interpolate";
    r.inputs = {a, b};
    StandardFormSentence phi = read_sentence(a);
    StandardFormSentence psi = read_sentence(b);
    SaturationLimits limits;
    limits.max_clauses = opt.clause_cap;
    Interpolant it;
    try {
        Timer t(r, "interpolate_ms");
        it = interpolate_gbsr(phi, psi, limits);
    } catch (const NotEntailed& e) {
        r.verdicts["verdict"] = "NotEntailed";
        r.verdicts["detail"] = e.what();
        return finish(r, opt, 1);
    }
    auto set_json = [](const std::set<std::string>& s) {
        return std::vector<std::string>(s.begin(), s.end());
    };
    r.verdicts["exclusive_predicates"] = set_json(it.partition.pi1);
    r.verdicts["positive_only_predicates"] = set_json(it.partition.pi2);
    r.verdicts["negative_only_predicates"] = set_json(it.partition.pi3);
    r.verdicts["shared_predicates"] = set_json(it.partition.pi4);
    r.verdicts["left_clauses"] = it.left_clauses;
    r.verdicts["right_clauses"] = it.right_clauses;
    switch (it.kind) {
        case InterpolantKind::Falsum:
            r.verdicts["verdict"] = "ok";
            r.verdicts["interpolant"] = "false";
            return finish(r, opt, 0);
        case InterpolantKind::Verum:
            r.verdicts["verdict"] = "ok";
            r.verdicts["interpolant"] = "true";
            return finish(r, opt, 0);
        default:
            break;
    }
    r.verdicts["verdict"] = "ok";
    r.verdicts["interpolant"] = serialize(*it.sentence.to_formula());
    r.verdicts["core_clauses"] = it.core_clauses;
    r.verdicts["left_leg_verified"] = it.left_verified;
    r.verdicts["right_leg_verified"] = it.right_verified;
    return finish(r, opt, 0);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"first-order fragment toolkit"};
    app.require_subcommand(1);
    Options opt;
    app.add_flag("--json", opt.as_json, "machine-readable JSON report on stdout");
    app.add_flag("--no-timings", opt.no_timings, "omit timings from the report");
    app.add_flag("--trace", opt.trace, "include the transformation trace");
    app.add_option("--max-size", opt.max_size, "bounded-search universe cap");
    app.add_option("--depth", opt.depth, "ground-term universe depth cap");
    app.add_option("--clause-cap", opt.clause_cap, "saturation clause cap");
    app.add_option("--size-guard", opt.size_guard, "normal-form size guard");

    std::string file1, file2;
    auto add_one = [&](const char* name, const char* desc) {
        CLI::App* c = app.add_subcommand(name, desc);
        c->fallthrough();  // global flags may follow the subcommand
        c->add_option("file", file1, "input sentence (.fol)")->required();
        return c;
    };
    auto add_two = [&](const char* name, const char* desc, const char* l1, const char* l2) {
        CLI::App* c = app.add_subcommand(name, desc);
        c->fallthrough();
        c->add_option(l1, file1)->required();
        c->add_option(l2, file2)->required();
        return c;
    };
    add_one("classify", "fragment membership report");
    add_one("to-bsr", "transform a GBSR sentence to exists*-forall* form");
    add_one("to-unnested", "remove nested universal scopes from a GAF sentence");
    add_one("skolemize", "Skolemize a closed sentence");
    add_one("check-shape", "check the Skolemized single-variable shape");
    add_one("to-monadic", "translate to the monadic fragment");
    CLI::App* dec = add_one("decide", "decide or bounded-search satisfiability");
    dec->add_option("--fragment", opt.fragment, "auto|bsr|bounded")
        ->check(CLI::IsMember({"auto", "bsr", "bounded"}));
    add_two("check-equiv", "bounded equivalence check", "a", "b");
    add_two("shrink", "shrink a model of a GBSR sentence", "model", "sentence");
    add_two("interpolate", "Craig-Lyndon interpolant of an entailment", "phi", "psi");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        if (cmd == "classify") return cmd_classify(file1, opt);
        if (cmd == "to-bsr") return cmd_to_bsr(file1, opt);
        if (cmd == "to-unnested") return cmd_to_unnested(file1, opt);
        if (cmd == "skolemize") return cmd_skolemize(file1, opt);
        if (cmd == "check-shape") return cmd_check_shape(file1, opt);
        if (cmd == "to-monadic") return cmd_to_monadic(file1, opt);
        if (cmd == "decide") return cmd_decide(file1, opt);
        if (cmd == "check-equiv") return cmd_check_equiv(file1, file2, opt);
        if (cmd == "shrink") return cmd_shrink(file1, file2, opt);
        if (cmd == "interpolate") return cmd_interpolate(file1, file2, opt);
        std::cerr << "unknown subcommand: " << cmd << '\n';
        return 2;
    } catch (const SyntaxError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const LimitHit& e) {
        std::cerr << "resource limit: " << e.what() << '\n';
        return 3;
    } catch (const BudgetExceeded& e) {
        std::cerr << "resource limit: " << e.what() << '\n';
        return 3;
    } catch (const SizeGuardExceeded& e) {
        std::cerr << "resource limit: " << e.what() << '\n';
        return 3;
    } catch (const FoltError& e) {
        // Negative domain verdicts (not in fragment, not a model, ...).
        std::cerr << "verdict: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
