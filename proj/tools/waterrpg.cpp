// Command-line front end for the watermarking library.
//
// Subcommands: encode, decode-graph, embed, extract, attack, eval.
// Exit status: 0 success, 1 domain error, 2 usage error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <waterrpg/attacks.hpp>
#include <waterrpg/embed/rewrite.hpp>
#include <waterrpg/extract.hpp>
#include <waterrpg/metrics.hpp>
#include <waterrpg/minilang/parser.hpp>
#include <waterrpg/rpg.hpp>
#include <waterrpg/sip.hpp>

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw waterrpg::Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw waterrpg::Error("cannot write '" + path + "'");
    out << text;
}

std::vector<std::int64_t> parse_ints(const std::string& text) {
    std::vector<std::int64_t> vals;
    std::string norm = text;
    for (char& c : norm)
        if (c == ',') c = ' ';
    std::istringstream in(norm);
    std::int64_t v = 0;
    while (in >> v) vals.push_back(v);
    if (!in.eof()) throw waterrpg::Error("bad integer list: '" + text + "'");
    return vals;
}

std::vector<std::vector<std::int64_t>> parse_input_file(const std::string& path) {
    std::vector<std::vector<std::int64_t>> inputs;
    std::istringstream in(slurp(path));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        inputs.push_back(parse_ints(line));
    }
    return inputs;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic software watermarking for MiniLang programs"};
    app.require_subcommand(1);

    // encode
    std::uint64_t enc_w = 0;
    std::string enc_out;
    auto* enc = app.add_subcommand("encode", "Encode a number as a self-inverting permutation and its graph");
    enc->add_option("w", enc_w, "watermark number (>= 1)")->required();
    enc->add_option("--out", enc_out, "write the graph to this file");

    // decode-graph
    std::string dec_file;
    auto* dec = app.add_subcommand("decode-graph", "Recover the number hidden in a graph file");
    dec->add_option("file", dec_file, "graph file")->required();

    // embed
    std::string emb_program, emb_key, emb_mode = "naive", emb_out;
    std::uint64_t emb_w = 0;
    auto* emb = app.add_subcommand("embed", "Embed a watermark into a program");
    emb->add_option("--program", emb_program, "source program")->required();
    emb->add_option("--key", emb_key, "key input, quoted integers")->required();
    emb->add_option("--w", emb_w, "watermark number")->required();
    emb->add_option("--mode", emb_mode, "naive | stealthy")->check(CLI::IsMember({"naive", "stealthy"}));
    emb->add_option("--out", emb_out, "output path for the watermarked program")->required();

    // extract
    std::string ext_program, ext_key;
    auto* ext = app.add_subcommand("extract", "Extract the watermark from a program");
    ext->add_option("--program", ext_program, "watermarked program")->required();
    ext->add_option("--key", ext_key, "key input, quoted integers")->required();

    // attack
    std::string atk_program, atk_kind, atk_out, atk_key, atk_mode = "naive";
    std::uint64_t atk_seed = 0, atk_w = 0;
    auto* atk = app.add_subcommand("attack", "Apply a seeded semantic attack to a program");
    atk->add_option("--program", atk_program, "program to attack")->required();
    atk->add_option("--attack", atk_kind, "attack kind")->required();
    atk->add_option("--seed", atk_seed, "attack seed");
    atk->add_option("--out", atk_out, "output path")->required();
    atk->add_option("--key", atk_key, "key input (edge-retarget only)");
    atk->add_option("--w", atk_w, "watermark number (edge-retarget only)");
    atk->add_option("--mode", atk_mode, "embedding mode (edge-retarget only)")
        ->check(CLI::IsMember({"naive", "stealthy"}));

    // eval
    std::string ev_orig, ev_marked, ev_key, ev_inputs;
    auto* ev = app.add_subcommand("eval", "Measure overheads and stealth of an embedding");
    ev->add_option("--original", ev_orig, "original program")->required();
    ev->add_option("--watermarked", ev_marked, "watermarked program")->required();
    ev->add_option("--key", ev_key, "key input, quoted integers")->required();
    ev->add_option("--inputs", ev_inputs, "file with one input vector per line")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (*enc) {
            waterrpg::Permutation sip = waterrpg::encode_number_to_sip(enc_w);
            waterrpg::ReduciblePermutationGraph g = waterrpg::encode_sip_to_rpg(sip);
            std::cout << waterrpg::format_permutation(sip) << "\n";
            std::string text = waterrpg::serialize_graph(g);
            if (!enc_out.empty()) {
                spit(enc_out, text);
            } else {
                std::cout << text;
            }
        } else if (*dec) {
            waterrpg::ReduciblePermutationGraph g = waterrpg::parse_graph(slurp(dec_file));
            waterrpg::ValidityReport rep = waterrpg::validate_rpg(g);
            if (!rep.ok()) throw waterrpg::Error("invalid graph: " + rep.summary());
            std::cout << waterrpg::decode_sip_to_number(waterrpg::decode_rpg_to_sip(g)) << "\n";
        } else if (*emb) {
            auto p = waterrpg::minilang::parse_program(slurp(emb_program));
            auto res = waterrpg::embed::embed(p, parse_ints(emb_key), emb_w,
                                              waterrpg::embed::mode_from_name(emb_mode));
            spit(emb_out, waterrpg::minilang::serialize_program(res.program));
            spit(emb_out + ".plan", waterrpg::embed::serialize_plan(res.plan));
        } else if (*ext) {
            auto p = waterrpg::minilang::parse_program(slurp(ext_program));
            waterrpg::ExtractionResult res = waterrpg::extract_watermark(p, parse_ints(ext_key));
            std::cout << waterrpg::serialize_graph(res.graph);
            std::cout << "watermark " << res.watermark << "\n";
        } else if (*atk) {
            auto p = waterrpg::minilang::parse_program(slurp(atk_program));
            waterrpg::attacks::Kind kind = waterrpg::attacks::kind_from_name(atk_kind);
            waterrpg::minilang::MiniProgram out;
            if (kind == waterrpg::attacks::Kind::EdgeRetarget) {
                if (atk_key.empty() || atk_w == 0)
                    throw waterrpg::Error("edge-retarget needs --key and --w");
                out = waterrpg::attacks::edge_retarget(p, parse_ints(atk_key), atk_w,
                                                       waterrpg::embed::mode_from_name(atk_mode), atk_seed);
            } else {
                out = waterrpg::attacks::attack_program(p, {kind, atk_seed, -1});
            }
            spit(atk_out, waterrpg::minilang::serialize_program(out));
        } else if (*ev) {
            auto p = waterrpg::minilang::parse_program(slurp(ev_orig));
            auto ps = waterrpg::minilang::parse_program(slurp(ev_marked));
            waterrpg::metrics::MetricsReport rep =
                waterrpg::metrics::compute_metrics(p, ps, parse_ints(ev_key), parse_input_file(ev_inputs));
            std::cout << waterrpg::metrics::emit_report(rep);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
