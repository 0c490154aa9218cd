#include "qnet/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qnet/protocols.hpp"
#include "qnet/rng.hpp"

namespace qnet::cli {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

Precision parse_precision(const std::string& s) {
    if (s == "double") return Precision::Double;
    if (s == "single") return Precision::Single;
    throw ConfigError("precision must be 'single' or 'double', got '" + s + "'");
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

std::string table_to_csv(const std::vector<std::string>& columns,
                         const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream os;
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << '\n';
    }
    return os.str();
}

std::string table_to_json(const std::string& demo, const std::vector<std::string>& columns,
                          const std::vector<std::vector<std::string>>& rows) {
    json j{{"demo", demo}, {"columns", columns}, {"rows", rows}};
    return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file '" + path + "'");
    f << content;
}

std::string printable(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (static_cast<unsigned char>(c) < 32 || static_cast<unsigned char>(c) > 126) c = '.';
    return out;
}

struct DemoOutput {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    json params = json::object();
    json results = json::object();
    ProtocolReport report;
};

BitStream demo_payload(const RunConfig& cfg, bool pairwise) {
    if (!cfg.message.empty()) return BitStream::from_text(cfg.message);
    if (pairwise && cfg.bits % 2 != 0)
        throw ConfigError("bit count must be even for pairwise demos");
    Rng rng = Rng(cfg.seed).split("data");
    return BitStream::random(cfg.bits, rng);
}

DemoOutput run_teleportation_demo(const RunConfig& cfg) {
    std::vector<double> angles;
    for (int k = 0; k <= 8; ++k) angles.push_back(k * M_PI / 4.0);
    TeleportationOptions opts;
    opts.precision = cfg.precision;
    opts.progress = cfg.progress;
    const TeleportationResult res = run_teleportation(angles, cfg.ensemble, cfg.seed, opts);

    DemoOutput out;
    out.columns = {"theta", "expected", "observed"};
    for (std::size_t i = 0; i < res.angles.size(); ++i)
        out.rows.push_back(
            {fmt_double(res.angles[i]), fmt_double(res.expected[i]), fmt_double(res.observed[i])});
    out.params = {{"ensemble", cfg.ensemble}, {"angles", res.angles.size()}};
    out.report = res.report;
    return out;
}

DemoOutput run_superdense_demo(const RunConfig& cfg) {
    const BitStream data = demo_payload(cfg, true);
    SuperdenseOptions opts;
    opts.pulse_ns = cfg.pulse_ns;
    opts.signal_speed_km_per_s = cfg.signal_speed_km_per_s;
    opts.channel_capacity = cfg.capacity;
    opts.precision = cfg.precision;
    opts.progress = cfg.progress;
    const SuperdenseResult res = run_superdense(data, cfg.length_km, cfg.alpha_db_per_km,
                                                cfg.seed, opts);

    DemoOutput out;
    out.columns = {"index", "sent", "received"};
    for (std::size_t i = 0; i < data.size(); ++i)
        out.rows.push_back({std::to_string(i), std::to_string(data.bits[i]),
                            std::to_string(res.received.bits[i])});
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (data.bits[i] != res.received.bits[i]) ++mismatches;
    out.params = {{"bits", data.size()},
                  {"length_km", cfg.length_km},
                  {"attenuation_db_per_km", cfg.alpha_db_per_km},
                  {"pulse_ns", cfg.pulse_ns},
                  {"signal_speed_km_per_s", cfg.signal_speed_km_per_s}};
    out.results = {{"bit_mismatches", mismatches}};
    out.report = res.report;
    return out;
}

DemoOutput run_interception_demo(const RunConfig& cfg) {
    const BitStream data = demo_payload(cfg, true);
    const InterceptionResult res = run_interception(data, cfg.seed, cfg.precision);

    DemoOutput out;
    out.columns = {"pair", "b1_sent", "b2_sent", "bob_b1", "bob_b2", "eve_bit"};
    for (std::size_t p = 0; p < data.size() / 2; ++p)
        out.rows.push_back({std::to_string(p), std::to_string(data.bits[2 * p]),
                            std::to_string(data.bits[2 * p + 1]),
                            std::to_string(res.bob_bits.bits[2 * p]),
                            std::to_string(res.bob_bits.bits[2 * p + 1]),
                            std::to_string(res.eve_bits.bits[p])});
    std::size_t parity_errors = 0, phase_matches = 0, eve_matches = 0;
    for (std::size_t p = 0; p < data.size() / 2; ++p) {
        if (res.bob_bits.bits[2 * p + 1] != data.bits[2 * p + 1]) ++parity_errors;
        if (res.bob_bits.bits[2 * p] == data.bits[2 * p]) ++phase_matches;
        if (res.eve_bits.bits[p] == data.bits[2 * p + 1]) ++eve_matches;
    }
    out.params = {{"bits", data.size()}};
    out.results = {{"parity_errors", parity_errors},
                   {"phase_matches", phase_matches},
                   {"eve_matches", eve_matches}};
    out.report = res.report;
    return out;
}

DemoOutput run_shor_demo_cli(const RunConfig& cfg) {
    const BitStream message =
        cfg.message.empty() ? demo_payload(cfg, false) : BitStream::from_text(cfg.message);
    ShorOptions opts;
    opts.precision = cfg.precision;
    opts.progress = cfg.progress;
    const ShorResult res = run_shor_demo(message, cfg.seed, opts);

    DemoOutput out;
    out.columns = {"index", "sent", "protected", "unprotected"};
    for (std::size_t i = 0; i < message.size(); ++i)
        out.rows.push_back({std::to_string(i), std::to_string(message.bits[i]),
                            std::to_string(res.protected_bits.bits[i]),
                            std::to_string(res.unprotected_bits.bits[i])});
    std::size_t protected_errors = 0, unprotected_errors = 0;
    for (std::size_t i = 0; i < message.size(); ++i) {
        if (res.protected_bits.bits[i] != message.bits[i]) ++protected_errors;
        if (res.unprotected_bits.bits[i] != message.bits[i]) ++unprotected_errors;
    }
    out.params = {{"bits", message.size()}};
    out.results = {{"protected_errors", protected_errors},
                   {"unprotected_errors", unprotected_errors}};
    if (message.size() % 8 == 0 && !message.bits.empty()) {
        out.results["message_text"] = printable(message.to_text());
        out.results["protected_text"] = printable(res.protected_bits.to_text());
        out.results["unprotected_text"] = printable(res.unprotected_bits.to_text());
    }
    out.report = res.report;
    return out;
}

}  // namespace

RunConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(f);
    } catch (const json::exception& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");

    RunConfig cfg;
    reject_unknown_keys(doc,
                        {"demo", "ensemble", "bits", "message", "seed", "precision", "progress",
                         "channel", "output"},
                        "config");
    try {
        if (doc.contains("demo")) cfg.demo = doc["demo"].get<std::string>();
        if (doc.contains("ensemble")) cfg.ensemble = doc["ensemble"].get<std::size_t>();
        if (doc.contains("bits")) cfg.bits = doc["bits"].get<std::size_t>();
        if (doc.contains("message")) cfg.message = doc["message"].get<std::string>();
        if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("precision"))
            cfg.precision = parse_precision(doc["precision"].get<std::string>());
        if (doc.contains("progress")) cfg.progress = doc["progress"].get<bool>();
        if (doc.contains("channel")) {
            const json& ch = doc["channel"];
            reject_unknown_keys(
                ch, {"length_km", "signal_speed_km_per_s", "pulse_ns", "capacity", "error"},
                "config.channel");
            if (ch.contains("length_km")) cfg.length_km = ch["length_km"].get<double>();
            if (ch.contains("signal_speed_km_per_s"))
                cfg.signal_speed_km_per_s = ch["signal_speed_km_per_s"].get<double>();
            if (ch.contains("pulse_ns")) cfg.pulse_ns = ch["pulse_ns"].get<double>();
            if (ch.contains("capacity") && !ch["capacity"].is_null())
                cfg.capacity = ch["capacity"].get<std::size_t>();
            if (ch.contains("error")) {
                const json& err = ch["error"];
                reject_unknown_keys(err, {"type", "alpha_db_per_km"}, "config.channel.error");
                const std::string type = err.value("type", "none");
                if (type == "none")
                    cfg.alpha_db_per_km = 0.0;
                else if (type == "attenuation")
                    cfg.alpha_db_per_km = err.value("alpha_db_per_km", 0.16);
                else
                    throw ConfigError("unsupported channel error type '" + type + "'");
            }
        }
        if (doc.contains("output")) {
            const json& o = doc["output"];
            reject_unknown_keys(o, {"path", "format"}, "config.output");
            if (o.contains("path")) cfg.out = o["path"].get<std::string>();
            if (o.contains("format")) cfg.format = o["format"].get<std::string>();
        }
    } catch (const json::exception& e) {
        throw ConfigError("config value error: " + std::string(e.what()));
    }
    return cfg;
}

void cmd_run(const RunConfig& cfg) {
    if (cfg.format != "csv" && cfg.format != "json")
        throw ConfigError("format must be 'csv' or 'json', got '" + cfg.format + "'");

    DemoOutput out;
    if (cfg.demo == "teleportation")
        out = run_teleportation_demo(cfg);
    else if (cfg.demo == "superdense")
        out = run_superdense_demo(cfg);
    else if (cfg.demo == "interception")
        out = run_interception_demo(cfg);
    else if (cfg.demo == "shor")
        out = run_shor_demo_cli(cfg);
    else
        throw ConfigError("unknown demo '" + cfg.demo + "' (see `list`)");

    const std::string table = cfg.format == "csv" ? table_to_csv(out.columns, out.rows)
                                                  : table_to_json(cfg.demo, out.columns, out.rows);
    json clocks = json::object();
    for (const auto& [name, t] : out.report.clock_s) clocks[name] = t;
    const json report{{"demo", cfg.demo},
                      {"seed", cfg.seed},
                      {"params", out.params},
                      {"results", out.results},
                      {"clocks_s", clocks},
                      {"counters",
                       {{"lost_qubits", out.report.lost_qubits},
                        {"corrupted_groups", out.report.corrupted_groups}}}};

    if (cfg.out.empty()) {
        std::cout << table;
        std::cout << report.dump(2) << std::endl;
    } else {
        write_file(cfg.out, table);
        write_file(cfg.out + ".report.json", report.dump(2) + "\n");
        std::cout << cfg.demo << ": wrote " << cfg.out << " and " << cfg.out << ".report.json"
                  << std::endl;
    }
}

std::string demo_list_text() {
    std::ostringstream os;
    os << "Available demos:\n"
       << "  teleportation   Bell-pair state transfer; --ensemble systems per angle\n"
       << "  superdense      two classical bits per qubit over lossy fiber;\n"
       << "                  --bits/--message, --length-km, --attenuation-db-per-km\n"
       << "  interception    superdense with an eavesdropper on the Alice->Bob hop;\n"
       << "                  --bits/--message\n"
       << "  shor            nine-qubit error-protected transmission vs. unprotected;\n"
       << "                  --bits/--message (slow: 512x512 density matrices)\n"
       << "Custom runs: `run --config file.json` with keys {demo, ensemble, bits, message,\n"
       << "seed, precision, progress, channel{length_km, signal_speed_km_per_s, pulse_ns,\n"
       << "capacity, error{type, alpha_db_per_km}}, output{path, format}}.\n";
    return os.str();
}

std::string demo_list_json() {
    const json j{
        {"demos",
         {{{"name", "teleportation"}, {"params", {"ensemble", "seed", "precision"}}},
          {{"name", "superdense"},
           {"params",
            {"bits", "message", "seed", "length-km", "attenuation-db-per-km", "pulse-ns",
             "precision"}}},
          {{"name", "interception"}, {"params", {"bits", "message", "seed", "precision"}}},
          {{"name", "shor"}, {"params", {"bits", "message", "seed", "precision"}}}}}};
    return j.dump(2) + "\n";
}

int cli_main(int argc, char** argv) {
    CLI::App app{"quantum network simulator: density-matrix systems, agents and noisy channels"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string demo_arg, config_path, precision_arg;
    bool progress_flag = false, no_progress_flag = false;

    CLI::App* run = app.add_subcommand("run", "run a named demo or a config-described simulation");
    run->add_option("demo", demo_arg, "one of: teleportation, superdense, interception, shor");
    run->add_option("--config", config_path, "JSON run-config file")->envname("QNET_CONFIG");
    auto* o_ens = run->add_option("--ensemble", cfg.ensemble, "systems per angle (teleportation)")
                      ->envname("QNET_ENSEMBLE");
    auto* o_bits = run->add_option("--bits", cfg.bits, "generated payload bits")
                       ->envname("QNET_BITS");
    auto* o_msg = run->add_option("--message", cfg.message, "text payload (overrides --bits)")
                      ->envname("QNET_MESSAGE");
    auto* o_seed = run->add_option("--seed", cfg.seed, "master seed")->envname("QNET_SEED");
    auto* o_len = run->add_option("--length-km", cfg.length_km, "channel length in km")
                      ->envname("QNET_LENGTH_KM");
    auto* o_att = run->add_option("--attenuation-db-per-km", cfg.alpha_db_per_km,
                                  "fiber attenuation coefficient")
                      ->envname("QNET_ATTENUATION_DB_PER_KM");
    auto* o_pulse = run->add_option("--pulse-ns", cfg.pulse_ns, "pulse interval in ns")
                        ->envname("QNET_PULSE_NS");
    auto* o_out = run->add_option("--out", cfg.out, "output file for the results table")
                      ->envname("QNET_OUT");
    auto* o_fmt = run->add_option("--format", cfg.format, "table format: csv or json")
                      ->envname("QNET_FORMAT");
    auto* o_prec = run->add_option("--precision", precision_arg, "single or double")
                       ->envname("QNET_PRECISION");
    run->add_flag("--progress", progress_flag, "render per-agent progress counters");
    run->add_flag("--no-progress", no_progress_flag, "disable progress output");

    CLI::App* list = app.add_subcommand("list", "list demos and their parameters");
    bool list_json = false;
    list->add_flag("--json", list_json, "machine-readable listing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage problems are configuration errors
    }

    try {
        if (list->parsed()) {
            std::cout << (list_json ? demo_list_json() : demo_list_text());
            return 0;
        }

        if (!config_path.empty()) {
            RunConfig file_cfg = load_config_file(config_path);
            // command-line flags win over config-file values
            if (!o_ens->count()) cfg.ensemble = file_cfg.ensemble;
            if (!o_bits->count()) cfg.bits = file_cfg.bits;
            if (!o_msg->count()) cfg.message = file_cfg.message;
            if (!o_seed->count()) cfg.seed = file_cfg.seed;
            if (!o_len->count()) cfg.length_km = file_cfg.length_km;
            if (!o_att->count()) cfg.alpha_db_per_km = file_cfg.alpha_db_per_km;
            if (!o_pulse->count()) cfg.pulse_ns = file_cfg.pulse_ns;
            if (!o_out->count()) cfg.out = file_cfg.out;
            if (!o_fmt->count()) cfg.format = file_cfg.format;
            if (!o_prec->count()) cfg.precision = file_cfg.precision;
            cfg.signal_speed_km_per_s = file_cfg.signal_speed_km_per_s;
            cfg.capacity = file_cfg.capacity;
            if (demo_arg.empty()) demo_arg = file_cfg.demo;
            if (!progress_flag && !no_progress_flag) cfg.progress = file_cfg.progress;
        }
        if (o_prec->count()) cfg.precision = parse_precision(precision_arg);
        if (progress_flag) cfg.progress = true;
        if (no_progress_flag) cfg.progress = false;
        if (demo_arg.empty())
            throw ConfigError("no demo given (positional argument or config file)");
        cfg.demo = demo_arg;

        cmd_run(cfg);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << std::endl;
        return 2;
    }
}

}  // namespace qnet::cli
