#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "lspd/dataset.hpp"
#include "lspd/simgen.hpp"

using namespace lspd;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = "/tmp/" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("labels map to 1..J in first-appearance order") {
  const auto path = write_temp("ds_basic.csv", "x1,x2,label\n1,2,a\n3,4,b\n5,6,a\n");
  const auto res = ingest_csv(path);
  REQUIRE(res.data.num_classes == 2);
  REQUIRE(res.data.labels[0] == 1);
  REQUIRE(res.data.labels[1] == 2);
  REQUIRE(res.data.labels[2] == 1);
  REQUIRE(res.data.class_names[0] == "a");
  REQUIRE(res.rows_dropped == 0);
}

TEST_CASE("rows with missing or non-numeric cells are dropped and counted") {
  const auto path =
      write_temp("ds_missing.csv", "x1,x2,label\n1,,a\n3,4,b\n5,6,a\n7,oops,b\n");
  const auto res = ingest_csv(path);
  REQUIRE(res.rows_dropped == 2);
  REQUIRE(res.data.n() == 2);
}

TEST_CASE("single-class file is invalid data") {
  const auto path = write_temp("ds_single.csv", "x1,label\n1,a\n2,a\n");
  REQUIRE_THROWS_AS(ingest_csv(path), InvalidDataError);
}

TEST_CASE("missing file raises an ingestion error") {
  REQUIRE_THROWS_AS(ingest_csv("/tmp/definitely_not_here.csv"), IngestError);
}

TEST_CASE("label column is found by name") {
  const auto path = write_temp("ds_named.csv", "y,x1\nA,1\nB,2\n");
  CsvSchema schema;
  schema.label_column = "y";
  const auto res = ingest_csv(path, schema);
  REQUIRE(res.data.dim() == 1);
  REQUIRE(res.data.points(1, 0) == 2.0);
}

TEST_CASE("dump and ingest round-trips a generated dataset bitwise") {
  const LabeledDataset ds = generate({ExampleId::E3, 4}, 25, 77);
  const std::string path = "/tmp/ds_roundtrip.csv";
  dump_csv(ds, path);
  const auto back = ingest_csv(path);
  REQUIRE(back.data.n() == ds.n());
  REQUIRE(back.data.dim() == ds.dim());
  REQUIRE(back.data.labels == ds.labels);
  for (int i = 0; i < ds.n(); ++i)
    for (int c = 0; c < ds.dim(); ++c)
      REQUIRE(back.data.points(i, c) == ds.points(i, c));
}

TEST_CASE("class splitting keeps rows with their classes") {
  const LabeledDataset ds = generate({ExampleId::E3, 3}, 10, 5);
  const auto perclass = ds.split_by_class();
  REQUIRE(perclass.size() == 2);
  REQUIRE(perclass[0].rows() == 10);
  REQUIRE(perclass[1].rows() == 10);
  REQUIRE(perclass[0].row(0) == ds.points.row(0));
}
