#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string cli = CDXOU_CLI_PATH;
const std::string data_dir = CDXOU_DATA_DIR;

int run(const std::string& args) {
    const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("price-zcb emits decreasing discount factors and a manifest") {
    const fs::path out = fresh_dir("cdxou_cli_zcb");
    const int rc = run("price-zcb --params " + data_dir + "/params_ig_20200102_term013.txt" +
                       " --maturities 0.5,1,2,5 --out " + out.string());
    CHECK(rc == 0);
    CHECK(fs::exists(out / "manifest.json"));
    std::ifstream in(out / "zcb.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "maturity_years,price");
    double prev = 1.0;
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) {
        const auto comma = line.find(',');
        const double price = std::stod(line.substr(comma + 1));
        CHECK(price < prev);
        CHECK(price > 0.0);
        prev = price;
        ++rows;
    }
    CHECK(rows == 4);
}

TEST_CASE("input errors exit with code 2") {
    const fs::path out = fresh_dir("cdxou_cli_err");
    // empty quote file
    const fs::path empty = out / "empty.csv";
    std::ofstream(empty) << "";
    CHECK(run("calibrate --params " + data_dir + "/params_ig_20200102_term013.txt --quotes " +
              empty.string() + " --out " + out.string()) == 2);
    // unknown option
    CHECK(run("price-zcb --params " + data_dir + "/params_ig_20200102_term013.txt --nonsense 1") == 2);
    // missing subcommand
    CHECK(run("") == 2);
    // missing parameter file
    CHECK(run("price-zcb --params /does/not/exist.txt") == 2);
}

TEST_CASE("fixed seed reproduces byte-identical outputs") {
    const fs::path out1 = fresh_dir("cdxou_cli_det1");
    const fs::path out2 = fresh_dir("cdxou_cli_det2");
    const std::string base = "price-cdxo --params " + data_dir +
                             "/params_ig_20200102_term013.txt --engine mc --strikes 50,60 "
                             "--paths 20000 --seed 77 --out ";
    CHECK(run(base + out1.string()) == 0);
    CHECK(run(base + out2.string()) == 0);
    // identical up to the wall-clock timing column
    auto strip_timing = [](const std::string& csv) {
        std::stringstream in(csv), out;
        std::string line;
        while (std::getline(in, line)) out << line.substr(0, line.rfind(',')) << '\n';
        return out.str();
    };
    CHECK(strip_timing(slurp(out1 / "cdxo.csv")) == strip_timing(slurp(out2 / "cdxo.csv")));
    CHECK(!slurp(out1 / "cdxo.csv").empty());
    // rerunning the identical config into the same directory reproduces the
    // manifest byte for byte
    const std::string manifest_before = slurp(out1 / "manifest.json");
    CHECK(run(base + out1.string()) == 0);
    CHECK(slurp(out1 / "manifest.json") == manifest_before);
}

TEST_CASE("density command reports unit mass") {
    const fs::path out = fresh_dir("cdxou_cli_density");
    const int rc = run("density --params " + data_dir + "/params_density_demo.txt" +
                       " --fft-n 512 --fft-b 3000 --t 1 --out " + out.string());
    CHECK(rc == 0);
    std::ifstream in(out / "density_summary.csv");
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    const double mass = std::stod(row.substr(0, row.find(',')));
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(fs::exists(out / "density.csv"));
}

TEST_CASE("calibrate and correlate pipelines run end to end") {
    const fs::path out_cal = fresh_dir("cdxou_cli_cal");
    int rc = run("calibrate --params " + data_dir + "/params_ig_20200102_term013.txt" +
                 " --quotes " + data_dir + "/quotes_synthetic.csv" + " --curve " + data_dir +
                 "/treasury_synthetic_20200102.csv --spot-bps 45.5 --max-iter 12 --paths 4000" +
                 " --out " + out_cal.string());
    CHECK(rc == 0);
    CHECK(fs::exists(out_cal / "calibration.csv"));
    CHECK(fs::exists(out_cal / "rate_calibration.csv"));
    std::ifstream in(out_cal / "calibration.csv");
    std::string header, row;
    std::getline(in, header);
    CHECK(header.substr(0, 23) == "term_years,theta_lambda");
    int rows = 0;
    while (std::getline(in, row))
        if (!row.empty()) ++rows;
    CHECK(rows == 2);  // two expiries in the sample surface

    const fs::path out_corr = fresh_dir("cdxou_cli_corr");
    rc = run("correlate --params " + data_dir + "/params_ig_20200102_term013.txt" + " --quotes " +
             data_dir + "/quotes_synthetic_series.csv --term 0.13 --max-iter 8 --paths 4000" +
             " --out " + out_corr.string());
    CHECK(rc == 0);
    std::ifstream cin(out_corr / "correlation.csv");
    std::getline(cin, header);
    CHECK(header == "statistic,correlation");
    int stats = 0;
    while (std::getline(cin, row))
        if (!row.empty()) ++stats;
    CHECK(stats == 3);
}

TEST_CASE("moments command emits the report row") {
    const fs::path out = fresh_dir("cdxou_cli_moments");
    const int rc = run("moments --params " + data_dir + "/params_ig_20200102_term013.txt" +
                       " --quotes " + data_dir + "/quotes_synthetic.csv --term 0.13" +
                       " --paths 20000 --strike-step 1 --out " + out.string());
    CHECK(rc == 0);
    std::ifstream in(out / "moments.csv");
    std::string header, row;
    std::getline(in, header);
    CHECK(header.substr(0, 10) == "term_years");
    CHECK(static_cast<bool>(std::getline(in, row)));
    CHECK(row.substr(0, 4) == "0.13");
}
