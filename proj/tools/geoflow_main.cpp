#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "geoflow/acceptance.hpp"
#include "geoflow/driver.hpp"

namespace {

std::vector<double> parse_point(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"curvature verification for gradient rho-Einstein solitons"};
    app.require_subcommand(1);

    // --- verify ----------------------------------------------------------
    geoflow::VerifyOptions vopt;
    std::string v_example, v_warped;
    double v_rho = 0, v_lambda = 0, v_perturb = 0;
    auto* verify = app.add_subcommand("verify", "run the identity suite on an instance");
    auto* v_ex = verify->add_option("--example", v_example, "catalog example name");
    auto* v_wd = verify->add_option("--warped", v_warped, "warped:<spec> instance");
    v_ex->excludes(v_wd);
    auto* v_rho_opt = verify->add_option("--rho", v_rho, "override rho where free");
    auto* v_lam_opt = verify->add_option("--lambda", v_lambda, "override lambda where free");
    verify->add_option("--points", vopt.points, "sample point count")->default_val(50);
    verify->add_option("--seed", vopt.seed, "sampler seed")->default_val(42);
    verify->add_option("--tol-scale", vopt.tol_scale, "uniform tolerance multiplier")
        ->default_val(1.0);
    verify->add_option("--json", vopt.json_path, "write the report to this path");
    verify->add_option("--perturb", v_perturb,
                       "negative control: add eps*x0*x1 to the potential");

    // --- tensors ---------------------------------------------------------
    geoflow::TensorsOptions topt;
    std::string t_example, t_warped, t_at;
    double t_rho = 0, t_lambda = 0;
    auto* tensors = app.add_subcommand("tensors", "dump the curvature bundle at a point");
    auto* t_ex = tensors->add_option("--example", t_example, "catalog example name");
    auto* t_wd = tensors->add_option("--warped", t_warped, "warped:<spec> instance");
    t_ex->excludes(t_wd);
    tensors->add_option("--at", t_at, "comma-separated chart point")->required();
    auto* t_rho_opt = tensors->add_option("--rho", t_rho, "override rho where free");
    auto* t_lam_opt = tensors->add_option("--lambda", t_lambda, "override lambda where free");
    tensors->add_option("--json", topt.json_path, "write the dump to this path");

    // --- bryant ----------------------------------------------------------
    geoflow::BryantOptions bopt;
    double b_c0 = 0, b_t_min_survive = 0;
    auto* bryant = app.add_subcommand("bryant", "integrate the warped soliton system");
    bryant->add_option("--n", bopt.n, "dimension")->default_val(3);
    bryant->add_option("--rho", bopt.rho, "rho")->default_val(0.0);
    bryant->add_option("--lambda", bopt.lambda, "lambda")->default_val(0.0);
    auto* b_c0_opt =
        bryant->add_option("--c0", b_c0, "shooting normalization f''(0); default: branch sign");
    bryant->add_option("--dt", bopt.dt, "step size")->default_val(1e-3);
    bryant->add_option("--t-max", bopt.t_max, "integration horizon")->default_val(50.0);
    auto* b_ts_opt = bryant->add_option("--t-min-survive", b_t_min_survive,
                                        "stop events before this time exit nonzero");
    bryant->add_option("--csv", bopt.csv_path, "write the profile CSV to this path");
    bryant->add_flag("--embed-check", bopt.embed_check,
                     "re-verify the interpolated metric through the curvature pipeline");
    bryant->add_flag("--require-positive", bopt.require_positive,
                     "exit nonzero unless both sectional curvatures stay positive");

    // --- suite -----------------------------------------------------------
    geoflow::SuiteOptions sopt;
    bool suite_all = false;
    auto* suite = app.add_subcommand("suite", "run every acceptance criterion");
    suite->add_flag("--all", suite_all, "run all criteria (default)");
    suite->add_option("--json-dir", sopt.json_dir, "write one JSON report per criterion");

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) {
            vopt.example = v_ex->count() ? v_example : v_warped;
            if (vopt.example.empty()) {
                std::cerr << "error: verify needs --example or --warped\n";
                return geoflow::kExitConfig;
            }
            if (v_rho_opt->count()) vopt.rho = v_rho;
            if (v_lam_opt->count()) vopt.lambda = v_lambda;
            vopt.perturb = v_perturb;
            return geoflow::run_verify(vopt, std::cout);
        }
        if (tensors->parsed()) {
            topt.example = t_ex->count() ? t_example : t_warped;
            if (topt.example.empty()) {
                std::cerr << "error: tensors needs --example or --warped\n";
                return geoflow::kExitConfig;
            }
            if (t_rho_opt->count()) topt.rho = t_rho;
            if (t_lam_opt->count()) topt.lambda = t_lambda;
            topt.at = parse_point(t_at);
            return geoflow::run_tensors(topt, std::cout);
        }
        if (bryant->parsed()) {
            if (b_c0_opt->count()) bopt.c0 = b_c0;
            if (b_ts_opt->count()) bopt.t_min_survive = b_t_min_survive;
            return geoflow::run_bryant(bopt, std::cout);
        }
        if (suite->parsed()) {
            return geoflow::run_suite(sopt, std::cout);
        }
    } catch (const geoflow::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return geoflow::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return geoflow::kExitEvaluation;
    }
    return geoflow::kExitConfig;
}
