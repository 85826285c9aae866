#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "dcs/config.hpp"
#include "dcs/errors.hpp"
#include "dcs/scenario.hpp"

using namespace dcs;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) out.push_back(cell);
    return out;
}

std::string csv_of(const ScenarioResult& r) {
    std::ostringstream os;
    write_csv(r, os);
    return os.str();
}

int error_line(const std::string& text) {
    try {
        (void)parse_config(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

std::string error_text(const std::string& text, std::vector<std::string> overrides = {}) {
    try {
        (void)parse_config(text, overrides);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("defaults") {
    const auto cfg = parse_config("");
    CHECK(cfg.scenario == Scenario::fig2a);
    CHECK(cfg.g == 1.0);
    CHECK(cfg.lambda == 0.1);
    CHECK(cfg.omega_c == 100.0);
    CHECK(cfg.omega_q() == doctest::Approx(110.0));
    CHECK(cfg.params().chi() == doctest::Approx(0.1));
    CHECK(cfg.epsilon == cplx(0.05));
    CHECK(cfg.drive_form == DriveForm::rwa);
    CHECK(cfg.phase_correction);
    CHECK(cfg.n_max == 40);
    CHECK(cfg.time_step() == doctest::Approx(2 * std::numbers::pi / (50 * 110.0)));

    const auto comments = parse_config("# only a comment\n\n   \n# another\n");
    CHECK(comments.describe() == cfg.describe());
}

TEST_CASE("values and derived quantities") {
    SUBCASE("lambda fixes the detuning") {
        const auto cfg = parse_config("lambda = 0.2\n");
        CHECK(cfg.params().delta() == doctest::Approx(5.0));
        CHECK(cfg.omega_q() == doctest::Approx(105.0));
    }
    SUBCASE("omega_q and delta are alternatives") {
        CHECK(parse_config("omega_q = 120").lambda == doctest::Approx(0.05));
        CHECK(parse_config("delta = 4").lambda == doctest::Approx(0.25));
        CHECK(parse_config("lambda = 0.1\nomega_q = 110\ndelta = 10").lambda == doctest::Approx(0.1));
    }
    SUBCASE("drive and flags") {
        const auto cfg = parse_config(
            "scenario = readout\nepsilon = 0.08\nepsilon_phase = 1.5\ndrive_form = cosine\nphase_correction = off\n"
            "initial_state = bare\nbasis = first_order\nn_max = 60\ndt = 1e-4\nconvergence = no\n");
        CHECK(cfg.scenario == Scenario::readout);
        CHECK(std::abs(cfg.epsilon - std::polar(0.08, 1.5)) < 1e-15);
        CHECK(cfg.drive_form == DriveForm::cosine);
        CHECK_FALSE(cfg.phase_correction);
        CHECK(cfg.initial_state == ExcitedInitial::bare_e0);
        CHECK(cfg.basis == DressedVariant::first_order);
        CHECK(cfg.n_max == 60);
        CHECK(cfg.time_step() == 1e-4);
        CHECK_FALSE(cfg.convergence);
    }
    SUBCASE("fig4 defaults") {
        const auto cfg = parse_config("scenario = fig4");
        CHECK(cfg.qubit_drive_amplitude() == cplx(0.05 * 110.0));
        CHECK(cfg.qubit_drive_frequency() == doctest::Approx(110.0 + 0.1 * (2 * 4.0 + 2)));
    }
    SUBCASE("sweeps") {
        const auto fig2c = parse_config("scenario = fig2c").effective_sweep();
        CHECK(fig2c.name == "lambda");
        const auto explicit_sweep = parse_config("sweep = epsilon\nsweep_start = 0.02\nsweep_stop = 0.1\nsweep_points = 5");
        const auto values = explicit_sweep.effective_sweep().values();
        REQUIRE(values.size() == 5);
        CHECK(values.front() == 0.02);
        CHECK(values[2] == doctest::Approx(0.06));
        CHECK(values.back() == 0.1);
        CHECK(parse_config("sweep = alpha_sq\nsweep_points = 3").effective_sweep().values().size() == 3);
        CHECK_THROWS_AS(parse_config("sweep_points = 3"), ConfigError);
    }
}

TEST_CASE("errors carry line numbers") {
    const std::string bad_scenario = error_text("scenario = fig9");
    CHECK(bad_scenario.find("fig9") != std::string::npos);
    for (const char* name : {"fig2a", "fig2b", "fig2c", "fig2d", "fig4", "readout", "custom"})
        CHECK(bad_scenario.find(name) != std::string::npos);

    CHECK(error_line("g = 1\n# note\nbogus = 3\n") == 3);
    CHECK(error_line("\n\nlambda = zero") == 3);
    CHECK(error_line("n_max = 4.5") == 1);
    CHECK(error_line("missing value =\n") == 1);
    CHECK(error_line("just words") == 1);
    CHECK(error_line("phase_correction = maybe") == 1);
    CHECK(error_line("lambda = 0.1\ng = -1") == 2);
    CHECK(error_line("lambda = 0.1\n\nomega_q = 120") == 3);
    CHECK(error_text("lambda = 0.1\nomega_q = 120").find("inconsistent") != std::string::npos);
    CHECK(error_line("sweep = omega_c\nsweep_start = 1\nsweep_stop = 2") == 1);
}

TEST_CASE("overrides") {
    const std::vector<std::string> set{"epsilon=0.1", "scenario = fig2d"};
    const auto cfg = parse_config("epsilon = 0.02\nscenario = fig2a", set);
    CHECK(cfg.epsilon == cplx(0.1));
    CHECK(cfg.scenario == Scenario::fig2d);

    // one detuning override replaces every detuning key from the file
    const std::vector<std::string> lam{"lambda=0.05"};
    CHECK(parse_config("lambda = 0.1\nomega_q = 110", lam).lambda == 0.05);
    const std::vector<std::string> both{"lambda=0.05", "omega_q=120"};
    CHECK(parse_config("lambda = 0.1", both).lambda == doctest::Approx(0.05));
    const std::vector<std::string> clash{"lambda=0.05", "omega_q=110"};
    CHECK(error_text("", clash).find("inconsistent") != std::string::npos);

    const std::vector<std::string> junk{"nonsense=1"};
    CHECK_THROWS_AS(parse_config("", junk), ConfigError);
    CHECK(error_text("", junk).find("override") != std::string::npos);
}

TEST_CASE("config file loading") {
    CHECK_THROWS_AS(load_config("/nonexistent/dir/none.cfg"), ConfigError);
    const auto path = std::filesystem::temp_directory_path() / "dcs_test_config.cfg";
    {
        std::ofstream out(path);
        out << "scenario = readout\nepsilon = 0.07\n";
    }
    const std::vector<std::string> set{"n_max=50"};
    const auto cfg = load_config(path.string(), set);
    CHECK(cfg.scenario == Scenario::readout);
    CHECK(cfg.epsilon == cplx(0.07));
    CHECK(cfg.n_max == 50);
    std::filesystem::remove(path);
}

TEST_CASE("CSV output") {
    SUBCASE("empty result") {
        ScenarioResult r;
        r.metadata = "# scenario=custom";
        r.columns = {"x", "y"};
        CHECK(csv_of(r) == "# scenario=custom\nx,y,converged\n");
    }
    SUBCASE("round trip to 12 significant digits") {
        ScenarioResult r;
        r.metadata = "# scenario=custom";
        r.columns = {"a", "b"};
        r.rows = {{1.0 / 3.0, -2.718281828459045e-7}, {123456.789012345, 0.0}};
        r.converged = {true, false};
        std::istringstream in(csv_of(r));
        std::string line;
        std::getline(in, line);
        std::getline(in, line);
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
            std::getline(in, line);
            const auto cells = split(line, ',');
            REQUIRE(cells.size() == 3);
            for (std::size_t j = 0; j < 2; ++j) {
                const double back = std::stod(cells[j]);
                CHECK(std::abs(back - r.rows[i][j]) <= 5e-12 * std::abs(r.rows[i][j]));
            }
            CHECK(cells[2] == (r.converged[i] ? "true" : "false"));
        }
    }
    SUBCASE("file output and I/O failure") {
        ScenarioResult r;
        r.metadata = "# scenario=custom";
        r.columns = {"x"};
        const auto path = std::filesystem::temp_directory_path() / "dcs_test_out.csv";
        emit_csv(r, path.string());
        std::ifstream in(path);
        std::stringstream buf;
        buf << in.rdbuf();
        CHECK(buf.str() == csv_of(r));
        std::filesystem::remove(path);
        CHECK_THROWS_AS(emit_csv(r, "/nonexistent/dir/out.csv"), Error);
    }
}

TEST_CASE("scenario runs") {
    SUBCASE("fig2b schema and metadata") {
        const auto cfg = parse_config("scenario = fig2b\nsweep = alpha_sq\nsweep_start = 1\nsweep_stop = 2\nsweep_points = 2\n"
                                      "convergence = off\n");
        const auto r = run_scenario(cfg);
        const std::vector<std::string> expected{"alpha_sq", "F_D_g", "F_g", "gap_g", "F_D_e", "F_e", "gap_e"};
        CHECK(r.columns == expected);
        REQUIRE(r.rows.size() == 2);
        CHECK(r.value(0, "alpha_sq") == 1.0);
        CHECK(r.value(1, "alpha_sq") == 2.0);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(r.value(i, "gap_g") == doctest::Approx(r.value(i, "F_D_g") - r.value(i, "F_g")));
            for (const char* col : {"F_D_g", "F_g", "F_D_e", "F_e"}) {
                CHECK(r.value(i, col) >= -1e-9);
                CHECK(r.value(i, col) <= 1.0 + 1e-9);
            }
        }
        const std::string csv = csv_of(r);
        CHECK(csv.rfind("# scenario=fig2b", 0) == 0);
        CHECK(csv.find("params=") != std::string::npos);
        const auto header = split(csv.substr(csv.find('\n') + 1, csv.find('\n', csv.find('\n') + 1) - csv.find('\n') - 1), ',');
        CHECK(header.back() == "converged");
    }
    SUBCASE("deterministic output") {
        const auto cfg = parse_config("scenario = fig2a\nsweep = alpha_sq\nsweep_start = 1\nsweep_stop = 4\nsweep_points = 3\n");
        CHECK(csv_of(run_scenario(cfg)) == csv_of(run_scenario(cfg)));
    }
    SUBCASE("readout point") {
        const auto r = run_scenario(parse_config("scenario = readout\nconvergence = off"));
        REQUIRE(r.rows.size() == 1);
        CHECK(r.value(0, "alpha_e_abs") < 1e-10);
        // simulated |<a>|^2 on the ground branch, close to the analytic |eps|^2 T^2
        CHECK(std::abs(r.value(0, "alpha_g_sq") / std::pow(0.05 * std::numbers::pi / 0.1, 2) - 1.0) < 0.05);
    }
    SUBCASE("cutoff raised to satisfy the truncation rule") {
        const auto cfg = parse_config("scenario = fig2a\nn_max = 10\nsweep = alpha_sq\nsweep_start = 4\nsweep_stop = 4\n"
                                      "sweep_points = 1\nconvergence = off");
        CHECK(run_scenario(cfg).rows.size() == 1);
    }
}
