// entsep: command-line frontend for the entanglement toolkit.

#include <entsep/io.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

using namespace entsep;

namespace {

struct Options {
  std::string family;
  std::vector<std::string> params;
  std::string input;
  std::string output;
  std::string format = "json";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::string protocol = "bbpssw";
  std::optional<double> f;
  std::optional<double> alpha;
  std::optional<double> target;
  std::size_t iters = 20;
  std::vector<std::string> dims;
  std::string map;
  std::size_t mapDim = 3;
  std::string witnessFile;
};

std::uint64_t resolveSeed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("ENTSEP_SEED")) {
    try {
      std::size_t used = 0;
      const std::uint64_t s = std::stoull(env, &used);
      if (used == std::string(env).size()) return s;
    } catch (const std::logic_error&) {
    }
    throw InputError(std::string("ENTSEP_SEED is not an unsigned integer: '") + env + "'");
  }
  return 0;
}

StateSource loadState(const Options& o) {
  if (!o.input.empty()) {
    if (!o.family.empty()) throw InputError("give either --input or --family, not both");
    return stateFromJson(readJsonFile(o.input), o.input);
  }
  if (o.family.empty()) throw InputError("a state is required: use --family or --input");
  std::map<std::string, std::string> kv;
  for (const auto& p : o.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw InputError("--param expects key=value, got '" + p + "'");
    kv[p.substr(0, eq)] = p.substr(eq + 1);
  }
  auto shortcut = [&](const char* key, const std::optional<double>& v) {
    if (v && !kv.count(key)) kv[key] = detail::fmt17(*v);
  };
  shortcut("alpha", o.alpha);
  shortcut("F", o.f);
  StateFamilySpec spec = specFromParams(o.family, kv);
  return {make(spec), specToJson(spec), spec};
}

Dims parseDims(const std::string& s) {
  const auto x = s.find('x');
  try {
    if (x != std::string::npos) {
      std::size_t u1 = 0, u2 = 0;
      const std::string a = s.substr(0, x), b = s.substr(x + 1);
      const Dims d{std::stoul(a, &u1), std::stoul(b, &u2)};
      if (u1 == a.size() && u2 == b.size()) return d;
    }
  } catch (const std::logic_error&) {
  }
  throw InputError("--dims expects AxB, got '" + s + "'");
}

void emit(const Options& o, const std::string& text) {
  if (o.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(o.output);
  if (!out) throw InputError("cannot write '" + o.output + "'");
  out << text;
}

std::string dumpJson(const Json& j) { return j.dump(2) + "\n"; }

Json header(const std::string& command, std::uint64_t seed, const Json& state) {
  Json h = reportHeader(command, seed);
  h["state"] = state;
  return h;
}

int runAnalyze(const Options& o, bool classifyOnly) {
  const std::uint64_t seed = resolveSeed(o);
  RngStream rng(seed);
  const StateSource src = loadState(o);
  const ClassificationHints hints = src.spec ? hintsFor(*src.spec) : ClassificationHints{};
  const Classification cls = classify(src.state, hints);
  if (classifyOnly) {
    if (o.format == "csv") {
      emit(o, "label,reason\n" + std::string(toString(cls.label)) + "," + cls.reason + "\n");
    } else {
      Json j = header("classify", seed, src.description);
      j["classification"] = toJson(cls);
      emit(o, dumpJson(j));
    }
    return 0;
  }
  const std::size_t budget = o.samples.value_or(20);
  const std::vector<CriterionReport> battery = criteriaBattery(src.state, budget, rng);
  if (o.format == "csv") {
    emit(o, criteriaCsv(battery));
    return 0;
  }
  Json j = header("analyze", seed, src.description);
  j["dims"] = {src.state.dimA(), src.state.dimB()};
  Json crit = Json::array();
  for (const auto& r : battery) crit.push_back(toJson(r));
  j["criteria"] = crit;
  j["classification"] = toJson(cls);
  emit(o, dumpJson(j));
  return 0;
}

ProtocolTrace filterTrace(Protocol p, const DensityMatrix& in, const FilterResult& r, std::size_t budget,
                          RngStream& rng) {
  const double before = fullyEntangledFraction(in, budget, rng).value;
  const double after = fullyEntangledFraction(r.outputState, budget, rng).value;
  return {p, {{"side", r.side == Subsystem::A ? 0.0 : 1.0}}, {{0, before, 1.0, 1.0}, {1, after, r.successProb, r.successProb}}};
}

int runDistill(const Options& o) {
  const std::uint64_t seed = resolveSeed(o);
  RngStream rng(seed);
  Json state = nullptr;
  ProtocolTrace trace;
  std::optional<DensityMatrix> output;
  if (o.protocol == "bbpssw") {
    if (!o.f || !o.target) throw InputError("bbpssw needs --f and --target");
    trace = bbpsswRun(*o.f, *o.target, o.iters > 200 ? o.iters : 200);
    state = {{"family", "isotropic"}, {"d", 2}, {"F", *o.f}};
  } else if (o.protocol == "filtering" || o.protocol == "reduction-filter" || o.protocol == "isotropic-reduce") {
    const StateSource src = loadState(o);
    state = src.description;
    const std::size_t budget = o.samples.value_or(20);
    if (o.protocol == "filtering") {
      const FilterResult r = filterFromNegativeEigenvector(src.state);
      trace = filterTrace(Protocol::Filtering, src.state, r, budget, rng);
      output = r.outputState;
    } else if (o.protocol == "reduction-filter") {
      const FilterResult r = reductionFilter(src.state);
      trace = filterTrace(Protocol::ReductionFilter, src.state, r, budget, rng);
      output = r.outputState;
    } else {
      const DensityMatrix q = isotropicReduceToQubits(src.state);
      const ProjectedQubits pq = projectToQubits(src.state.mat(), src.state.dims(),
                                                 lowestTwoLevels(src.state.dimA(), src.state.dimB()));
      trace = {Protocol::IsotropicReduce,
               {{"d", static_cast<double>(src.state.dimA())}},
               {{0, singletFraction(src.state), 1.0, 1.0}, {1, singletFraction(q), pq.probability, pq.probability}}};
      output = q;
    }
  } else {
    throw InputError("unknown protocol '" + o.protocol + "' (bbpssw, filtering, reduction-filter, isotropic-reduce)");
  }
  if (o.format == "csv") {
    emit(o, traceCsv(trace));
    return 0;
  }
  Json j = header("distill", seed, state);
  j["trace"] = toJson(trace);
  if (output) j["outputState"] = matrixToJson(output->mat(), output->dims());
  emit(o, dumpJson(j));
  return 0;
}

int runActivate(const Options& o) {
  const std::uint64_t seed = resolveSeed(o);
  if (!o.f || !o.alpha) throw InputError("activate needs --f and --alpha");
  const ProtocolTrace trace = activationRun(*o.f, *o.alpha, o.iters);
  if (o.format == "csv") {
    emit(o, traceCsv(trace));
    return 0;
  }
  Json j = header("activate", seed, {{"family", "stormer"}, {"alpha", *o.alpha}});
  j["trace"] = toJson(trace);
  emit(o, dumpJson(j));
  return 0;
}

int runVolume(const Options& o) {
  const std::uint64_t seed = resolveSeed(o);
  const RngStream root(seed);
  std::vector<Dims> ladder;
  for (const auto& s : o.dims) ladder.push_back(parseDims(s));
  if (ladder.empty()) ladder = {{2, 2}, {2, 3}, {2, 4}, {3, 3}};
  const std::size_t samples = o.samples.value_or(10000);
  std::vector<VolumeEstimate> rows;
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    VolumeEstimate e = estimatePptRatio(ladder[k].a, ladder[k].b, samples, root.split(k));
    e.seed = seed;
    rows.push_back(e);
  }
  if (o.format == "csv") {
    emit(o, volumeCsv(rows));
    return 0;
  }
  Json j = header("volume", seed, nullptr);
  Json arr = Json::array();
  for (const auto& r : rows) arr.push_back(toJson(r));
  j["estimates"] = arr;
  emit(o, dumpJson(j));
  return 0;
}

int runWitness(const Options& o) {
  const std::uint64_t seed = resolveSeed(o);
  RngStream rng(seed);
  Witness w;
  Json source;
  if (!o.witnessFile.empty()) {
    w = parseWitnessFile(o.witnessFile);
    source = {{"file", o.witnessFile}};
  } else {
    const std::string name = o.map.empty() ? "choi" : o.map;
    if (name == "choi") {
      w = witnessFromMap(choiMap());
    } else if (name == "reduction") {
      w = witnessFromMap(reductionMap(o.mapDim));
    } else if (name == "transposition") {
      w = witnessFromMap(transpositionMap(o.mapDim));
    } else {
      throw InputError("unknown map '" + name + "' (choi, reduction, transposition)");
    }
    source = {{"map", name}, {"d", w.dims.a}};
  }
  const ProductPositivityCertificate cert = certifyProductPositivity(w, o.samples.value_or(200), rng);
  Json j = header("witness", seed, nullptr);
  j["source"] = source;
  j["witness"] = matrixToJson(w.op, w.dims);
  j["productPositivity"] = {{"minValue", cert.minValue}, {"probes", cert.probes}, {"positive", cert.positive}};
  if (!o.input.empty() || !o.family.empty()) {
    const StateSource src = loadState(o);
    j["state"] = src.description;
    j["value"] = witnessValue(w, src.state);
  }
  if (o.format == "csv") {
    std::string csv = "min_product_value,positive";
    if (j.contains("value")) csv += ",value";
    csv += "\n" + detail::fmt17(cert.minValue) + "," + (cert.positive ? "true" : "false");
    if (j.contains("value")) csv += "," + detail::fmt17(j["value"].get<double>());
    emit(o, csv + "\n");
    return 0;
  }
  emit(o, dumpJson(j));
  return 0;
}

Upb upbFromJson(const Json& j, const std::string& where) {
  detail::allowOnly(j, {"dimA", "dimB", "vectors"}, where);
  const Dims dims{detail::count(j, "dimA", where), detail::count(j, "dimB", where)};
  const Json& vs = detail::field(j, "vectors", where);
  if (!vs.is_array()) throw InputError(where + ": 'vectors' must be an array");
  auto vec = [&](const Json& arr, std::size_t n) {
    if (!arr.is_array() || arr.size() != n) throw InputError(where + ": factor has wrong length");
    ComplexVector v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const Json& z = arr[i];
      if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
        throw InputError(where + ": factor entries must be [re, im] pairs");
      v(static_cast<Eigen::Index>(i)) = {z[0].get<double>(), z[1].get<double>()};
    }
    return v;
  };
  std::vector<ProductVector> members;
  for (const Json& m : vs) {
    detail::allowOnly(m, {"a", "b"}, where);
    members.push_back({vec(detail::field(m, "a", where), dims.a), vec(detail::field(m, "b", where), dims.b)});
  }
  return Upb(dims, std::move(members));
}

int runUpb(const Options& o) {
  const std::uint64_t seed = resolveSeed(o);
  const Upb upb = o.input.empty() ? tilesUpb() : upbFromJson(readJsonFile(o.input), o.input);
  const UpbReport report = validateUpb(upb);
  Json j = header("upb", seed, o.input.empty() ? Json{{"upb", "tiles"}} : Json{{"file", o.input}});
  j["validation"] = toJson(report);
  if (report.orthogonal && report.unextendible) {
    const DensityMatrix rho = upbComplementState(upb);
    const Spectrum s = hermitianEig(rho.mat());
    j["complement"] = {{"rank", numericalRank(s.eigenvalues)},
                       {"overlap", upbOverlap(rho, upb)},
                       {"ptMinEigenvalue", minEigenvalue(partialTranspose(rho))}};
  }
  if (o.format == "csv") {
    emit(o, std::string("orthogonal,unextendible,max_gram_deviation\n") + (report.orthogonal ? "true" : "false") +
                "," + (report.unextendible ? "true" : "false") + "," + detail::fmt17(report.maxGramDeviation) + "\n");
    return 0;
  }
  emit(o, dumpJson(j));
  return 0;
}

void addStateOptions(CLI::App* cmd, Options& o) {
  cmd->add_option("--family", o.family, "State family (singlet, werner, isotropic, stormer, rho2x4, ...)");
  cmd->add_option("--param", o.params, "Family parameter key=value (repeatable)");
  cmd->add_option("--input", o.input, "State spec or matrix JSON file");
}

void addCommon(CLI::App* cmd, Options& o) {
  cmd->add_option("--output", o.output, "Write to this path instead of stdout");
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--seed", o.seed, "RNG seed (falls back to ENTSEP_SEED, then 0)");
  cmd->add_option("--samples", o.samples, "Sample budget");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entsep: entanglement detection, distillation and volume estimates"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;

  auto* analyze = app.add_subcommand("analyze", "Run the criteria battery and classify a state");
  auto* classifyCmd = app.add_subcommand("classify", "Classify a state");
  auto* distill = app.add_subcommand("distill", "Run a distillation protocol");
  auto* activate = app.add_subcommand("activate", "Activation of bound entanglement");
  auto* volume = app.add_subcommand("volume", "Estimate PPT volume ratios");
  auto* witness = app.add_subcommand("witness", "Build, import and evaluate entanglement witnesses");
  auto* upb = app.add_subcommand("upb", "Validate an unextendible product basis");

  for (auto* cmd : {analyze, classifyCmd, distill, witness}) addStateOptions(cmd, o);
  for (auto* cmd : {analyze, classifyCmd, distill, activate, volume, witness, upb}) addCommon(cmd, o);
  for (auto* cmd : {analyze, classifyCmd, distill, activate, witness}) {
    cmd->add_option("--alpha", o.alpha, "Stormer parameter alpha");
    cmd->add_option("--f", o.f, "Singlet fraction F");
  }
  distill->add_option("--protocol", o.protocol, "bbpssw, filtering, reduction-filter, isotropic-reduce");
  distill->add_option("--target", o.target, "Target fidelity (bbpssw)");
  distill->add_option("--iters", o.iters, "Iteration cap (bbpssw, at least 200)");
  activate->add_option("--iters", o.iters, "Number of activation rounds");
  volume->add_option("--dims", o.dims, "Dimension pair AxB (repeatable)");
  witness->add_option("--map", o.map, "choi, reduction or transposition");
  witness->add_option("--d", o.mapDim, "Dimension for reduction/transposition maps");
  witness->add_option("--witness-file", o.witnessFile, "Import a witness matrix JSON file");
  upb->add_option("--input", o.input, "UPB JSON file {dimA, dimB, vectors: [{a, b}, ...]}");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*analyze) return runAnalyze(o, false);
    if (*classifyCmd) return runAnalyze(o, true);
    if (*distill) return runDistill(o);
    if (*activate) return runActivate(o);
    if (*volume) return runVolume(o);
    if (*witness) return runWitness(o);
    if (*upb) return runUpb(o);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition failed: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
