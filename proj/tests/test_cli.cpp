#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "shockrel/cli.hpp"

using namespace shockrel;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string write_model(const std::string& name, const std::string& text) {
    const auto path = (std::filesystem::temp_directory_path() / ("shockrel_cli_" + name + ".json")).string();
    std::ofstream(path) << text;
    return path;
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::vector<double> csv_row(const std::string& line) {
    std::vector<double> v;
    std::istringstream in(line);
    for (std::string cell; std::getline(in, cell, ',');) v.push_back(std::stod(cell));
    return v;
}

const std::string kExp12 =
    R"({"kind":"catastrophic","proc1":{"type":"exponential","rate":1},"proc2":{"type":"exponential","rate":2}})";
const std::string kErlang21Exp1 =
    R"({"kind":"catastrophic","proc1":{"type":"erlang","shape":2,"rate":1},"proc2":{"type":"exponential","rate":1}})";
const std::string kCumulative =
    R"({"kind":"cumulative","rate1":1,"rate2":1,"mag1":{"type":"exponential","rate":1},"mag2":{"type":"exponential","rate":1},"threshold":3})";

}  // namespace

TEST_CASE("survival on a grid") {
    const auto r = run_cli({"survival", "--model", write_model("exp12", kExp12), "--grid", "0:5:11"});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 12);
    CHECK(rows[0] == "t,value");
    CHECK(rows[1] == "0,1");
    CHECK(csv_row(rows[3])[1] == Catch::Approx(0.049787068367863943).epsilon(1e-15));
}

TEST_CASE("mean-fptf prints one value with 17 significant digits") {
    const auto r = run_cli({"mean-fptf", "--model", write_model("erl21", kErlang21Exp1)});
    REQUIRE(r.code == 0);
    CHECK(r.out == "0.75\n");
    const auto third = run_cli({"mean-fptf", "--model", write_model("exp12", kExp12)});
    CHECK(third.out == "0.33333333333333331\n");
}

TEST_CASE("compare agrees within 3.5 standard errors") {
    const auto r = run_cli({"compare", "--model", write_model("exp12", kExp12), "--grid", "0:2:5", "--reps", "1000000",
                            "--seed", "42", "--workers", "1"});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == "t,analytic,estimate,std_error,z");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto v = csv_row(rows[i]);
        REQUIRE(v.size() == 5);
        CHECK(std::abs(v[4]) <= 3.5);
    }
}

TEST_CASE("cumulative subcommands") {
    const auto path = write_model("cum", kCumulative);
    const auto d = run_cli({"damage-cdf", "--model", path, "--points", "1", "--x", "2"});
    REQUIRE(d.code == 0);
    CHECK(csv_row(lines(d.out)[1])[1] == Catch::Approx(0.603500960611993349).epsilon(1e-9));
    const auto m = run_cli({"damage-mean", "--model", path, "--points", "0,2"});
    CHECK(lines(m.out)[2] == "2,4");
    const auto f = run_cli({"fptf-model2", "--model", path, "--points", "2"});
    CHECK(csv_row(lines(f.out)[1])[1] == Catch::Approx(1.0 - 0.426907556460671537).epsilon(1e-9));
    const auto mean = run_cli({"mean-fptf", "--model", path});
    CHECK(mean.code == 0);
    const auto cmp = run_cli({"compare", "--model", path, "--points", "1,2,4", "--reps", "200000", "--seed", "5",
                              "--quantity", "damage-mean"});
    REQUIRE(cmp.code == 0);
    for (std::size_t i = 1; i <= 3; ++i) CHECK(std::abs(csv_row(lines(cmp.out)[i])[4]) <= 3.5);
}

TEST_CASE("usage and validation failures exit with 1") {
    const auto exp12 = write_model("exp12", kExp12);
    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"survival"}).code == 1);
    CHECK(run_cli({"survival", "--model", exp12}).code == 1);
    CHECK(run_cli({"survival", "--model", exp12, "--grid", "5:0:3"}).code == 1);
    CHECK(run_cli({"survival", "--model", "/nonexistent.json", "--grid", "0:1:2"}).code == 1);
    CHECK(run_cli({"damage-cdf", "--model", exp12, "--grid", "0:1:2", "--x", "1"}).code == 1);
    CHECK(run_cli({"simulate", "--model", exp12, "--grid", "0:1:2"}).code == 1);
    CHECK(run_cli({"survival", "--model", exp12, "--grid", "0:1:2", "--format", "xml"}).code == 1);
    CHECK(run_cli({"survival", "--model", write_model("bad", R"({"kind":"catastrophic"})"), "--grid", "0:1:2"}).code ==
          1);
    const auto r = run_cli({"survival", "--model", exp12, "--grid", "0:1"});
    CHECK(r.code == 1);
    CHECK(!r.err.empty());
    CHECK(r.out.empty());
}

TEST_CASE("numerical failures exit with 2 and name the quantity") {
    const auto path = write_model(
        "heavy", R"({"kind":"catastrophic","proc1":{"type":"weibull","shape":0.3,"scale":1},"proc2":{"type":"weibull","shape":0.7,"scale":2}})");
    const auto out_path = (std::filesystem::temp_directory_path() / "shockrel_cli_never_written.csv").string();
    std::filesystem::remove(out_path);
    const auto r = run_cli({"mean-fptf", "--model", path, "--rel-tol", "1e-16", "--out", out_path});
    CHECK(r.code == 2);
    CHECK(r.err.find("mean-fptf") != std::string::npos);
    CHECK(!std::filesystem::exists(out_path));
}

TEST_CASE("--out writes the report only on success") {
    const auto out_path = (std::filesystem::temp_directory_path() / "shockrel_cli_out.csv").string();
    std::filesystem::remove(out_path);
    const auto r = run_cli({"survival", "--model", write_model("exp12", kExp12), "--grid", "0:1:2", "--out", out_path});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream in(out_path);
    std::stringstream body;
    body << in.rdbuf();
    const double s1 = survival_probability({Exponential{1.0}, Exponential{2.0}}, 1.0);
    CHECK(body.str() == "t,value\n0,1\n1," + cli::format_real(s1) + "\n");
    std::filesystem::remove(out_path);
}

TEST_CASE("json output") {
    const auto r = run_cli({"fptf-cdf", "--model", write_model("exp12", kExp12), "--points", "0,1", "--format", "json"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["points"].size() == 2);
    CHECK(j["points"][1]["value"].get<double>() == Catch::Approx(0.950212931632136).epsilon(1e-14));
    CHECK(j["model"]["kind"] == "catastrophic");
    CHECK(j["policies"]["rel_tol"].get<double>() == 1e-10);
}

TEST_CASE("simulation output does not depend on workers") {
    const auto path = write_model("cum", kCumulative);
    std::string first;
    for (const char* w : {"1", "3", "8"}) {
        for (const char* fmt : {"csv", "json"}) {
            const auto r = run_cli({"simulate", "--model", path, "--grid", "0:4:5", "--reps", "20000", "--seed", "7",
                                    "--workers", w, "--format", fmt});
            REQUIRE(r.code == 0);
            if (std::string(fmt) == "json") continue;
            if (first.empty()) first = r.out;
            CHECK(r.out == first);
        }
    }
    CHECK(lines(first)[0] == "t,estimate,std_error");
}
