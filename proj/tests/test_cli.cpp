#include <catch_amalgamated.hpp>

#include <filesystem>
#include <random>
#include <sstream>

#include "ctqw/cli.hpp"

using namespace ctqw;
using namespace ctqw::cli;
namespace fs = std::filesystem;
constexpr double pi = std::numbers::pi;

namespace {

std::vector<std::string> words(const std::string& line)
{
    std::istringstream in(line);
    std::vector<std::string> w;
    for (std::string s; in >> s;) w.push_back(s);
    return w;
}

RunConfig parse(const std::string& line, const std::optional<std::string>& file = std::nullopt)
{
    return parse_config(words(line), file);
}

fs::path fresh_dir(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("ctqw_test_cli_" + name);
    fs::remove_all(p);
    return p;
}

int run_line(const std::string& line, std::string* err_text = nullptr)
{
    std::ostringstream out, err;
    const int code = main_entry(words(line), out, err);
    if (err_text) *err_text = err.str();
    return code;
}

}  // namespace

TEST_CASE("parrondo command line resolves the catalog strategies", "[cli]")
{
    const auto c = parse("parrondo --a xi=-1.8,tm=-1.2pi,tp=1.2pi --b xi=1.4,tm=-1.5pi,tp=1.5pi --sigma0 1 --t 1000");
    CHECK(c.command == Command::parrondo);
    REQUIRE(c.a);
    REQUIRE(c.b);
    CHECK(*c.a == StrategyCatalog::get("A"));
    CHECK(*c.b == StrategyCatalog::get("B"));
    const auto p = c.protocol_spec();
    CHECK(p.strategy_a == StrategyCatalog::get("A"));
    CHECK(p.strategy_b == StrategyCatalog::get("B"));
    CHECK(p.grid.half_width() == 2064);
    CHECK_FALSE(c.omega);
    CHECK(parse("parrondo --a A --b B").a == StrategyCatalog::get("A"));
}

TEST_CASE("evolve defaults", "[cli]")
{
    const auto c = parse("evolve --localized --t 100");
    CHECK(c.command == Command::evolve);
    CHECK_FALSE(c.defect);
    CHECK(c.localized);
    CHECK(c.t_end == 100.0);
    CHECK(c.samples == 101);
    CHECK(c.init().kind == InitialState::Kind::localized);
    CHECK(c.engine == Engine::chebyshev);
    CHECK(parse("evolve --t=25 --engine reference").engine == Engine::reference);
    CHECK(parse("sweep --axis xi:-2.5:2.5:11").samples == 21);
    const auto s = parse("omega-scan --a C --b D");
    CHECK(s.t_end == 500.0);
    CHECK(s.omega_count == 60);
}

TEST_CASE("conflicting options", "[cli]")
{
    CHECK_THROWS_AS(parse("sweep --axis xi:-2.5:2.5:101 --axis theta:0:6.28:50"), ConflictError);
    CHECK_THROWS_AS(parse("sweep"), ConflictError);
    CHECK_THROWS_AS(parse("contour --axis xi:-2.5:2.5:11"), ConflictError);
    CHECK_THROWS_AS(parse("contour --axis xi:0:1:3 --axis xi:1:2:3"), ConflictError);
    CHECK_THROWS_AS(parse("sweep --axis xi:0:1:3 --omega 2"), ConflictError);
    CHECK_THROWS_AS(parse("evolve --localized --sigma0 2"), ConflictError);
    CHECK_THROWS_AS(parse("evolve --figure fig2"), ConflictError);
    const auto c = parse("contour");
    REQUIRE(c.axes.size() == 2);
    CHECK(c.axes[0].steps * c.axes[1].steps == 1681);
}

TEST_CASE("usage errors name the offending token", "[cli]")
{
    auto message = [](const std::string& line) {
        try {
            parse(line);
        } catch (const UsageError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK_THAT(message("evolve --frobnicate 3"), Catch::Matchers::ContainsSubstring("--frobnicate"));
    CHECK_THAT(message("evolve --t abc"), Catch::Matchers::ContainsSubstring("abc"));
    CHECK_THAT(message("explode"), Catch::Matchers::ContainsSubstring("explode"));
    CHECK_THAT(message("evolve --defect xi=1,q=2"), Catch::Matchers::ContainsSubstring("q"));
    CHECK_THAT(message("sweep --axis xi:0:1"), Catch::Matchers::ContainsSubstring("xi:0:1"));
    CHECK_THROWS_AS(parse("omega-scan --a A"), UsageError);
    CHECK_THROWS_AS(parse("reproduce"), UsageError);
    CHECK_THROWS_AS(parse("verify"), UsageError);
    CHECK_THROWS_AS(parse("evolve --t"), UsageError);
    CHECK_THROWS_AS(parse("evolve --localized=yes"), UsageError);
    CHECK_THROWS_AS(parse("evolve --max-terms 4"), UsageError);
}

TEST_CASE("angle suffix", "[cli]")
{
    CHECK(parse_angle("pi") == pi);
    CHECK(parse_angle("-pi") == -pi);
    CHECK(parse_angle("1.2pi") == 1.2 * pi);
    CHECK(parse_angle("5pi/3") == 5.0 * pi / 3.0);
    CHECK(parse_angle("0.25") == 0.25);
    CHECK_THROWS_AS(parse_angle("2pix"), UsageError);
    CHECK_THROWS_AS(parse_angle("pi/0"), UsageError);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 5000; ++i) {
        const double x = u(rng);
        REQUIRE(parse_angle(io::format_double(x) + "pi") == x * pi);
    }
    const auto axis = parse_axis("theta:0:2pi:41");
    CHECK(axis.param == SweepParam::theta);
    CHECK(axis.max == 2.0 * pi);
}

TEST_CASE("config file precedence", "[cli]")
{
    const std::string file = R"({"t": 50, "sigma0": 2, "samples": 11, "defect": "C"})";
    const auto c = parse("evolve --t 20", file);
    CHECK(c.t_end == 20.0);
    CHECK(c.sigma0 == 2.0);
    CHECK(c.samples == 11);
    CHECK(c.defect == StrategyCatalog::get("C"));
    CHECK(parse("evolve --localized", file).localized);
    CHECK_THROWS_AS(parse("evolve", R"({"tee": 5})"), UsageError);
    CHECK_THROWS_AS(parse("evolve", R"({"t": [1, 2]})"), UsageError);
    CHECK_THROWS_AS(parse("evolve", R"({"t": {"x": 1}})"), UsageError);
    CHECK_THROWS_AS(parse("evolve", "not json"), UsageError);
    CHECK_THROWS_AS(parse("evolve", R"({"localized": true, "sigma0": 3})"), ConflictError);

    const std::string axes = R"({"axis": ["xi:0:1:3", "theta:0:pi:5"]})";
    const auto k = parse("contour", axes);
    REQUIRE(k.axes.size() == 2);
    CHECK(k.axes[1].max == pi);
    const auto s = parse("sweep --axis sigma0:1:5:3", axes);
    REQUIRE(s.axes.size() == 1);
    CHECK(s.axes[0].param == SweepParam::sigma0);
}

TEST_CASE("config echo is stable", "[cli]")
{
    const auto a = parse("evolve --defect B --t 30 --out x");
    const auto b = parse("evolve --t 30 --defect xi=1.4,tm=-1.5pi,tp=1.5pi --out y");
    CHECK(config_json(a) == config_json(b));
    CHECK(config_digest(a) == config_digest(b));
    CHECK(config_digest(a) != config_digest(parse("evolve --defect B --t 31")));
}

TEST_CASE("exit codes", "[cli]")
{
    CHECK(run_line("") == 2);
    CHECK(run_line("--help") == 0);
    std::string err;
    CHECK(run_line("evolve --bogus", &err) == 2);
    CHECK_THAT(err, Catch::Matchers::ContainsSubstring("--bogus"));
    CHECK(run_line("sweep --axis xi:0:1:3 --axis theta:0:1:3") == 2);

    const auto dir = fresh_dir("codes");
    // one 100-unit step needs far more than 16 expansion terms
    CHECK(run_line("evolve --localized --t 100 --samples 2 --max-terms 16 --out " + (dir / "bad").string(), &err) == 3);
    CHECK_THAT(err, Catch::Matchers::ContainsSubstring("numeric failure"));

    const auto good = dir / "good";
    CHECK(run_line("evolve --defect B --t 20 --samples 11 --out " + good.string()) == 0);
    for (const char* f : {"series.csv", "homogeneous.csv", "distribution.csv", "sigma.svg", "manifest.json"})
        CHECK(fs::exists(good / f));
    const auto m = io::read_manifest(good / "manifest.json");
    CHECK(m.command == "evolve");
    CHECK(m.files.size() == 4);
    CHECK(m.config.at("t") == 20.0);
    CHECK(run_line("verify " + (good / "manifest.json").string()) == 0);

    std::string csv = io::read_file(good / "series.csv");
    csv.back() = ' ';
    io::write_file(good / "series.csv", csv);
    CHECK(run_line("verify " + (good / "manifest.json").string()) == 4);
    CHECK(run_line("verify " + (dir / "nowhere.json").string()) == 1);
}

TEST_CASE("repeated runs produce identical artifacts", "[cli]")
{
    const auto dir = fresh_dir("repeat");
    const std::string base = "sweep --axis xi:0.5:1.5:3 --t 15 --samples 9 --out ";
    REQUIRE(run_line(base + (dir / "a").string() + " --workers 1") == 0);
    REQUIRE(run_line(base + (dir / "b").string() + " --workers 3") == 0);
    for (const char* f : {"sweep.csv", "sweep.svg"}) CHECK(io::read_file(dir / "a" / f) == io::read_file(dir / "b" / f));
    auto ja = io::read_manifest(dir / "a" / "manifest.json").to_json();
    auto jb = io::read_manifest(dir / "b" / "manifest.json").to_json();
    ja.erase("wall_clock_seconds");
    jb.erase("wall_clock_seconds");
    ja["config"].erase("workers");
    jb["config"].erase("workers");
    CHECK(ja == jb);
}
