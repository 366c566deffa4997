#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "minadv/runner.hpp"
#include "minadv/training.hpp"

using namespace minadv;

namespace {

std::string data_dir_or_fail(std::string flag_value) {
    if (!flag_value.empty()) return flag_value;
    const char* env = std::getenv("MINADV_DATA_DIR");
    if (env && *env) return env;
    throw std::invalid_argument("no data directory (use --data-dir or MINADV_DATA_DIR)");
}

std::string find_idx(const std::string& dir, const std::string& stem) {
    for (const char* suffix : {"", ".gz"}) {
        std::string p = dir + "/" + stem + suffix;
        if (std::filesystem::exists(p)) return p;
    }
    throw FormatError("missing " + stem + "[.gz] under " + dir);
}

Dataset load_split(const std::string& dir, bool train_split) {
    const char* img = train_split ? "train-images-idx3-ubyte" : "t10k-images-idx3-ubyte";
    const char* lab = train_split ? "train-labels-idx1-ubyte" : "t10k-labels-idx1-ubyte";
    Dataset ds = load_mnist_idx(find_idx(dir, img), find_idx(dir, lab));
    ds.split = train_split ? "train" : "test";
    return ds;
}

// "a..b" inclusive, or a comma-separated list
std::vector<int> parse_range(const std::string& spec) {
    std::vector<int> out;
    auto dots = spec.find("..");
    if (dots != std::string::npos) {
        int a = std::stoi(spec.substr(0, dots));
        int b = std::stoi(spec.substr(dots + 2));
        for (int i = a; i <= b; ++i) out.push_back(i);
        return out;
    }
    std::istringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    return out;
}

std::vector<int> parse_dims(const std::string& spec) {
    std::vector<int> dims;
    std::istringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, '-')) dims.push_back(std::stoi(tok));
    return dims;
}

int cmd_train(const std::string& data_dir, const std::string& out_path, TrainConfig cfg,
              bool adversarial) {
    Dataset tr = load_split(data_dir, true);
    Dataset te = load_split(data_dir, false);
    cfg.adversarial = adversarial;
    Network net = adversarial ? adv_train(tr, cfg, &std::cerr) : train(tr, cfg, &std::cerr);
    save_network(net, out_path);
    std::cout << "test accuracy " << accuracy(net, te) << "\n";
    return 0;
}

struct CertifyArgs {
    std::string model, data_dir, out_path, images_spec = "0..9", ids_spec, net_id;
    std::string targets = "all";
    std::string norm = "linf";
    double threshold = 1e-3;
    double timeout = 600.0;
    int workers = 1;
    AttackConfig cw;
};

int cmd_certify(const CertifyArgs& a) {
    Network net = load_network(a.model);
    Dataset test = load_split(a.data_dir, false);

    SuiteConfig cfg;
    cfg.net_id = a.net_id.empty() ? std::filesystem::path(a.model).stem().string() : a.net_id;
    cfg.norm = parse_norm(a.norm);
    cfg.threshold = a.threshold;
    cfg.per_target_timeout_s = a.timeout;
    cfg.workers = a.workers;
    cfg.cw = a.cw;

    std::vector<int> image_ids;
    if (!a.ids_spec.empty()) {
        image_ids = parse_range(a.ids_spec);
    } else {
        std::vector<int> positions = parse_range(a.images_spec);
        int need = 0;
        for (int p : positions) need = std::max(need, p + 1);
        std::vector<int> correct = select_correct_images(net, test, need);
        for (int p : positions) {
            if (p < 0 || p >= static_cast<int>(correct.size())) {
                throw std::invalid_argument("image position " + std::to_string(p) +
                                            " exceeds the correctly classified prefix");
            }
            image_ids.push_back(correct[p]);
        }
    }

    if (a.targets != "all") {
        throw std::invalid_argument("only --targets all is supported");
    }

    std::vector<ExperimentRecord> existing;
    bool fresh_file = !std::filesystem::exists(a.out_path);
    if (!fresh_file) existing = read_records_csv(a.out_path);

    std::ofstream append(a.out_path, std::ios::app | std::ios::binary);
    if (!append) throw FormatError("cannot write " + a.out_path);
    if (fresh_file) {
        append << records_csv_header() << '\n';
        append.flush();
    }
    auto sink = [&](const ExperimentRecord& r) {
        std::string line = record_csv_line(r) + "\n";
        append << line;
        append.flush();
        std::cerr << line;
    };

    std::vector<ExperimentRecord> all =
        run_certification_suite(net, test, image_ids, cfg, existing, sink);
    append.close();
    write_records_csv(a.out_path, all);
    std::cout << emit_tables(all);
    return 0;
}

int cmd_verify(const std::string& model, const std::string& data_dir, int image, int target,
               double delta, const std::string& norm_s, double timeout,
               const std::string& witness_pgm, const std::string& dump_path) {
    Network net = load_network(model);
    Dataset test = load_split(data_dir, false);
    if (image < 0 || image >= static_cast<int>(test.samples.size())) {
        throw std::invalid_argument("image index out of range");
    }
    VerifyQuery q{&net, test.samples[image].pixels, target, delta, parse_norm(norm_s), timeout};
    if (!dump_path.empty()) {
        QuerySystem qs = build_query(q);
        std::ofstream f(dump_path);
        dump_system(qs.sys, f);
    }
    VerifyOutcome out = verify_targeted(q);
    switch (out.status) {
        case VerifyStatus::Robust:
            std::cout << "robust\n";
            break;
        case VerifyStatus::Counterexample: {
            std::cout << "counterexample distance "
                      << distance(q.norm, q.center, out.witness) << "\n";
            if (!witness_pgm.empty()) {
                int side = static_cast<int>(std::lround(std::sqrt(double(out.witness.size()))));
                write_pgm(witness_pgm, out.witness, side, side);
            }
            break;
        }
        case VerifyStatus::Timeout:
            std::cout << "timeout\n";
            break;
    }
    return 0;
}

int cmd_attack(const std::string& model, const std::string& data_dir,
               const std::string& images_spec, const std::string& method,
               const std::string& norm_s, const AttackConfig& cfg, const std::string& out_path) {
    Network net = load_network(model);
    Dataset test = load_split(data_dir, false);
    Norm norm = parse_norm(norm_s);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + out_path);
    out << "image_id,source_label,method,norm,target_label,distance,succeeded\n";
    for (int id : parse_range(images_spec)) {
        const Sample& s = test.samples.at(id);
        if (method == "cw") {
            for (int t = 0; t < net.num_classes(); ++t) {
                if (t == s.label) continue;
                AttackResult r = cw(net, s.pixels, t, norm, cfg);
                out << id << ',' << s.label << ",cw," << norm_name(norm) << ',' << t << ','
                    << r.distance << ',' << (r.succeeded ? 1 : 0) << '\n';
            }
        } else {
            Vec adv = method == "fgm" ? fgm(net, s.pixels, s.label, cfg.epsilon)
                                      : bim(net, s.pixels, s.label, cfg.epsilon, cfg.alpha,
                                            cfg.iters);
            bool flipped = forward(net, adv).label != s.label;
            out << id << ',' << s.label << ',' << method << ',' << norm_name(norm) << ",-1,"
                << distance(norm, s.pixels, adv) << ',' << (flipped ? 1 : 0) << '\n';
        }
    }
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& record_files, const std::string& base,
               const std::string& hardened) {
    std::vector<ExperimentRecord> all;
    for (const std::string& f : record_files) {
        auto r = read_records_csv(f);
        all.insert(all.end(), r.begin(), r.end());
    }
    if (!all.empty()) std::cout << emit_tables(all);
    if (!base.empty() && !hardened.empty()) {
        std::cout << emit_defense_table(read_records_csv(base), read_records_csv(hardened));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"provably minimal adversarial distortion toolkit"};
    app.require_subcommand(1);

    std::string data_dir, model, out_path, norm = "linf";
    uint64_t seed = 0;
    TrainConfig tcfg;
    AttackConfig acfg;

    auto* train_cmd = app.add_subcommand("train", "train the classifier");
    auto* advtrain_cmd = app.add_subcommand("adv-train", "adversarially train the classifier");
    std::string arch = "784-24-24-24-10";
    for (auto* c : {train_cmd, advtrain_cmd}) {
        c->add_option("--data-dir", data_dir, "directory with the MNIST idx files");
        c->add_option("--out", out_path, "output network file")->required();
        c->add_option("--seed", seed, "PRNG seed")->required();
        c->add_option("--epochs", tcfg.epochs);
        c->add_option("--batch", tcfg.batch_size);
        c->add_option("--lr", tcfg.learning_rate);
        c->add_option("--arch", arch, "layer dims, e.g. 784-24-24-24-10");
    }
    advtrain_cmd->add_option("--pgd-eps", tcfg.pgd_eps);
    advtrain_cmd->add_option("--pgd-step", tcfg.pgd_step);
    advtrain_cmd->add_option("--pgd-iters", tcfg.pgd_iters);

    CertifyArgs cargs;
    auto* certify_cmd = app.add_subcommand("certify", "certify minimal adversarial distortion");
    certify_cmd->add_option("--model", cargs.model)->required();
    certify_cmd->add_option("--data-dir", cargs.data_dir);
    certify_cmd->add_option("--out", cargs.out_path, "records CSV (resumable)")->required();
    certify_cmd->add_option("--images", cargs.images_spec,
                            "positions among correctly classified test images, e.g. 0..9");
    certify_cmd->add_option("--ids", cargs.ids_spec, "explicit test-set indices");
    certify_cmd->add_option("--targets", cargs.targets, "target labels (only 'all')");
    certify_cmd->add_option("--norm", cargs.norm);
    certify_cmd->add_option("--threshold", cargs.threshold);
    certify_cmd->add_option("--timeout", cargs.timeout, "seconds per (image,target)");
    certify_cmd->add_option("--workers", cargs.workers);
    certify_cmd->add_option("--net-id", cargs.net_id);
    certify_cmd->add_option("--cw-iters", cargs.cw.cw_iters);
    certify_cmd->add_option("--cw-lr", cargs.cw.cw_lr);
    certify_cmd->add_option("--cw-c-init", cargs.cw.cw_c_init);
    certify_cmd->add_option("--cw-c-steps", cargs.cw.cw_c_search_steps);

    int v_image = 0, v_target = 0;
    double v_delta = 0.0, v_timeout = 600.0;
    std::string v_witness, v_dump;
    auto* verify_cmd = app.add_subcommand("verify", "single robustness query");
    verify_cmd->add_option("--model", model)->required();
    verify_cmd->add_option("--data-dir", data_dir);
    verify_cmd->add_option("--image", v_image)->required();
    verify_cmd->add_option("--target", v_target)->required();
    verify_cmd->add_option("--delta", v_delta)->required();
    verify_cmd->add_option("--norm", norm);
    verify_cmd->add_option("--timeout", v_timeout);
    verify_cmd->add_option("--witness-pgm", v_witness, "dump a found counterexample as PGM");
    verify_cmd->add_option("--dump-constraints", v_dump, "write the constraint system as text");

    std::string a_method = "cw", a_images = "0..9";
    auto* attack_cmd = app.add_subcommand("attack", "run gradient attacks");
    attack_cmd->add_option("--model", model)->required();
    attack_cmd->add_option("--data-dir", data_dir);
    attack_cmd->add_option("--images", a_images, "test-set indices");
    attack_cmd->add_option("--method", a_method, "cw | fgm | bim");
    attack_cmd->add_option("--norm", norm);
    attack_cmd->add_option("--eps", acfg.epsilon);
    attack_cmd->add_option("--alpha", acfg.alpha);
    attack_cmd->add_option("--iters", acfg.iters);
    attack_cmd->add_option("--seed", seed, "accepted for interface uniformity")->required();
    attack_cmd->add_option("--out", out_path)->required();

    std::vector<std::string> r_files;
    std::string r_base, r_hardened;
    auto* report_cmd = app.add_subcommand("report", "tables from records CSVs");
    report_cmd->add_option("--records", r_files);
    report_cmd->add_option("--base", r_base);
    report_cmd->add_option("--hardened", r_hardened);

    try {
        app.parse(argc, argv);
        tcfg.seed = seed;
        tcfg.layer_dims = parse_dims(arch);
        if (train_cmd->parsed()) {
            return cmd_train(data_dir_or_fail(data_dir), out_path, tcfg, false);
        }
        if (advtrain_cmd->parsed()) {
            return cmd_train(data_dir_or_fail(data_dir), out_path, tcfg, true);
        }
        if (certify_cmd->parsed()) {
            cargs.data_dir = data_dir_or_fail(cargs.data_dir);
            return cmd_certify(cargs);
        }
        if (verify_cmd->parsed()) {
            return cmd_verify(model, data_dir_or_fail(data_dir), v_image, v_target, v_delta,
                              norm, v_timeout, v_witness, v_dump);
        }
        if (attack_cmd->parsed()) {
            return cmd_attack(model, data_dir_or_fail(data_dir), a_images, a_method, norm, acfg,
                              out_path);
        }
        if (report_cmd->parsed()) {
            return cmd_report(r_files, r_base, r_hardened);
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return 0;  // --help
        std::cerr << "error: usage: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return 1;
    } catch (const FormatError& e) {
        std::cerr << "error: format: " << e.what() << "\n";
        return 2;
    } catch (const TrainingError& e) {
        std::cerr << "error: solver: " << e.what() << "\n";
        return 3;
    } catch (const SolverError& e) {
        std::cerr << "error: solver: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 3;
    }
}
