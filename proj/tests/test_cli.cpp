#include "sefi/cli.hpp"
#include "sefi/io_util.hpp"
#include "sefi/sft.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result sefi_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = sefi::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sefi_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("synth, density, features, cluster, expression-table and eval-ari") {
  const fs::path d = scratch("smoke");
  const std::string s = d.string() + "/";
  REQUIRE(sefi_run({"synth", "--seed", "4", "--out-dir", s + "syn", "--height", "96", "--width", "96", "--niches",
                    "3", "--genes", "6", "--density", "0.05"})
              .code == 0);
  CHECK(fs::exists(s + "syn/points.csv"));
  CHECK(fs::exists(s + "syn/points.csv.provenance.txt"));
  CHECK(fs::exists(s + "syn/dapi.png"));
  CHECK(fs::exists(s + "syn/truth.pgm"));

  REQUIRE(sefi_run({"density", "--points", s + "syn/points.csv", "--image", s + "syn/dapi.png", "--out", s + "g.sft"})
              .code == 0);
  const auto genes = sefi::load_feature_tensor(s + "g.sft");
  CHECK(genes.height() == 24);
  CHECK(genes.width() == 24);
  const auto prov = sefi::parse_provenance(sefi::read_file(s + "g.sft.provenance.txt"));
  CHECK(prov.at("command").rfind("sefi density ", 0) == 0);
  CHECK(prov.count("resolution") == 1);

  REQUIRE(sefi_run({"features", "--image", s + "syn/dapi.png", "--genes", s + "g.sft", "--out", s + "m.sft",
                    "--scales", "4,8"})
              .code == 0);
  CHECK(fs::exists(s + "m.sft.pca.json"));

  REQUIRE(sefi_run({"cluster", "--genes", s + "g.sft", "--morph", s + "m.sft", "--out", s + "l.pgm", "--png",
                    s + "l.png", "--merge-tree", s + "tree.csv", "--k", "5", "--final-k", "3"})
              .code == 0);
  CHECK(fs::exists(s + "l.png"));
  CHECK(sefi::read_file(s + "tree.csv").find('\n') != std::string::npos);

  REQUIRE(sefi_run({"expression-table", "--labels", s + "l.pgm", "--genes", s + "g.sft", "--out", s + "e.csv"}).code ==
          0);
  CHECK(sefi::read_file(s + "e.csv").rfind("cluster,pixels,", 0) == 0);

  const Result ari = sefi_run({"eval-ari", "--a", s + "l.pgm", "--b", s + "l.pgm"});
  CHECK(ari.code == 0);
  CHECK(ari.out.find("1") != std::string::npos);
  const Result truth = sefi_run({"eval-ari", "--a", s + "l.pgm", "--b", s + "syn/truth.pgm"});
  CHECK(truth.code == 0);
  CHECK(truth.out.rfind("ari,n\n", 0) == 0);
  fs::remove_all(d);
}

TEST_CASE("usage and data errors map to exit codes") {
  const fs::path d = scratch("errors");
  const std::string s = d.string() + "/";
  CHECK(sefi_run({}).code == 1);
  CHECK(sefi_run({"frobnicate"}).code == 1);
  CHECK(sefi_run({"density", "--points", s + "x.csv", "--out", s + "g.sft", "--bogus"}).code == 1);

  sefi::write_file(s + "p.csv", "x,y,gene\n1,1,A\n5,5,B\n");
  REQUIRE(sefi_run({"density", "--points", s + "p.csv", "--extent", "16x16", "--out", s + "g.sft"}).code == 0);
  const Result missing = sefi_run({"cluster", "--genes", s + "g.sft", "--out", s + "l.pgm"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("--final-k") != std::string::npos);
  CHECK(missing.err.find("--merge-threshold") != std::string::npos);

  CHECK(sefi_run({"density", "--points", s + "absent.csv", "--extent", "16x16", "--out", s + "h.sft"}).code == 2);
  sefi::write_file(s + "bad.csv", "x,y,gene\n1,oops,A\n");
  const Result bad = sefi_run({"density", "--points", s + "bad.csv", "--extent", "16x16", "--out", s + "h.sft"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("2") != std::string::npos);
  fs::remove_all(d);
}
