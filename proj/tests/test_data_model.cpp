#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "prc/data_model.hpp"

using namespace prc;

namespace {

CsvTable csv_of(const std::string& text) {
    std::istringstream in(text);
    return read_csv(in);
}

DatasetSchema toy_schema() {
    DatasetSchema schema;
    schema.baseline_columns = {"age", "sex"};
    schema.covariate_columns = {"bio1", "bio2"};
    schema.regressor_columns = {"age_t"};
    return schema;
}

Dataset toy_dataset() {
    CsvTable surv = csv_of(
        "id,time,event,age,sex\n"
        "A,5,1,50,male\n"
        "B,3,0,60,female\n"
        "C,8,1,45,female\n"
        "D,2,1,70,male\n");
    CsvTable longi = csv_of(
        "id,fuptime,bio1,bio2,age_t\n"
        "A,0,1.5,,50\n"
        "A,1,2.0,3.0,51\n"
        "B,0,0.5,1.0,60\n"
        "C,0,4.0,2.0,45\n"
        "C,2,,2.5,47\n"
        "D,0,1.0,1.0,70\n");
    return load_dataset(surv, longi, toy_schema());
}

}  // namespace

TEST_CASE("load_dataset parses both tables with roles") {
    Dataset data = toy_dataset();
    REQUIRE(data.survival.size() == 4);
    REQUIRE(data.longitudinal.size() == 6);
    REQUIRE(data.covariate_names == std::vector<std::string>{"bio1", "bio2"});
    REQUIRE(data.regressor_names == std::vector<std::string>{"age_t"});
    REQUIRE(!data.landmark.has_value());

    // baseline typing: age numeric, sex categorical with sorted levels
    REQUIRE(data.baseline.names == std::vector<std::string>{"age", "sex"});
    REQUIRE(data.baseline.is_categorical == std::vector<std::uint8_t>{0, 1});
    REQUIRE(data.baseline.levels[1] == std::vector<std::string>{"female", "male"});
    REQUIRE(data.survival[0].baseline[0] == 50.0);
    REQUIRE(data.survival[0].baseline[1] == 1.0);  // male
    REQUIRE(data.survival[1].baseline[1] == 0.0);  // female

    REQUIRE(data.survival[1].event == 0);
    REQUIRE(std::isnan(data.longitudinal[0].covariates[1]));  // missing bio2
    REQUIRE(data.longitudinal[1].covariates[1] == 3.0);
    REQUIRE(data.longitudinal[4].regressors[0] == 47.0);
}

TEST_CASE("load_dataset structural errors") {
    auto schema = toy_schema();
    // duplicate id
    REQUIRE_THROWS_WITH(
        load_dataset(csv_of("id,time,event,age,sex\nA,5,1,50,male\nA,3,0,60,female\n"),
                     csv_of("id,fuptime,bio1,bio2,age_t\n"), schema),
        Catch::Matchers::ContainsSubstring("duplicate subject id 'A'"));
    // event outside {0,1}
    REQUIRE_THROWS_WITH(load_dataset(csv_of("id,time,event,age,sex\nA,5,2,50,male\n"),
                                     csv_of("id,fuptime,bio1,bio2,age_t\n"), schema),
                        Catch::Matchers::ContainsSubstring("expected 0 or 1"));
    // negative time
    REQUIRE_THROWS_WITH(load_dataset(csv_of("id,time,event,age,sex\nA,-1,1,50,male\n"),
                                     csv_of("id,fuptime,bio1,bio2,age_t\n"), schema),
                        Catch::Matchers::ContainsSubstring("negative time"));
    // longitudinal id without survival row
    REQUIRE_THROWS_WITH(load_dataset(csv_of("id,time,event,age,sex\nA,5,1,50,male\n"),
                                     csv_of("id,fuptime,bio1,bio2,age_t\nZ,0,1,1,50\n"), schema),
                        Catch::Matchers::ContainsSubstring("subject id 'Z' has no survival row"));
    // unclassified column
    REQUIRE_THROWS_WITH(load_dataset(csv_of("id,time,event,age,sex,extra\nA,5,1,50,male,9\n"),
                                     csv_of("id,fuptime,bio1,bio2,age_t\n"), schema),
                        Catch::Matchers::ContainsSubstring("unclassified column(s): extra"));
    // missing required column
    REQUIRE_THROWS_WITH(load_dataset(csv_of("id,time,age,sex\nA,5,50,male\n"),
                                     csv_of("id,fuptime,bio1,bio2,age_t\n"), schema),
                        Catch::Matchers::ContainsSubstring("missing required column 'event'"));
    // missing baseline value
    REQUIRE_THROWS_WITH(load_dataset(csv_of("id,time,event,age,sex\nA,5,1,,male\n"),
                                     csv_of("id,fuptime,bio1,bio2,age_t\n"), schema),
                        Catch::Matchers::ContainsSubstring("baseline"));
    // missing regressor value
    REQUIRE_THROWS_WITH(load_dataset(csv_of("id,time,event,age,sex\nA,5,1,50,male\n"),
                                     csv_of("id,fuptime,bio1,bio2,age_t\nA,0,1,1,\n"), schema),
                        Catch::Matchers::ContainsSubstring("age_t"));
}

TEST_CASE("dataset save/load round trip is identical") {
    Dataset data = toy_dataset();
    auto schema = toy_schema();
    CsvTable surv = survival_to_csv(data, schema);
    CsvTable longi = longitudinal_to_csv(data, schema);
    std::ostringstream s1, s2;
    write_csv(s1, surv);
    write_csv(s2, longi);
    std::istringstream r1(s1.str()), r2(s2.str());
    Dataset back = load_dataset(read_csv(r1), read_csv(r2), schema);
    REQUIRE(equivalent(data, back));
}

TEST_CASE("subject row index") {
    Dataset data = toy_dataset();
    auto rows = rows_by_subject(data);
    REQUIRE(rows.size() == 4);
    REQUIRE(rows[0] == std::vector<std::size_t>{0, 1});
    REQUIRE(rows[3] == std::vector<std::size_t>{5});
    auto index = subject_index_map(data);
    REQUIRE(index.at("C") == 2);
}

TEST_CASE("log transform renames and transforms, rejects non-positive") {
    Dataset data = toy_dataset();
    Dataset out = log_transform(data, {"bio1"});
    REQUIRE(out.covariate_names[0] == "logBio1");
    REQUIRE(out.covariate_names[1] == "bio2");
    REQUIRE(out.longitudinal[0].covariates[0] == Catch::Approx(std::log(1.5)));
    REQUIRE(std::isnan(out.longitudinal[4].covariates[0]));  // missing stays missing
    // original untouched
    REQUIRE(data.longitudinal[0].covariates[0] == 1.5);

    Dataset bad = data;
    bad.longitudinal[2].covariates[0] = 0.0;
    REQUIRE_THROWS_WITH(log_transform(bad, {"bio1"}),
                        Catch::Matchers::ContainsSubstring("non-positive value"));
    REQUIRE_THROWS_WITH(log_transform(data, {"nope"}),
                        Catch::Matchers::ContainsSubstring("unknown longitudinal covariate"));
}

TEST_CASE("landmarking keeps survivors strictly past t_L and their history") {
    Dataset data = toy_dataset();
    std::vector<std::string> warnings;
    Dataset lm = apply_landmark(data, 2.0, &warnings);
    REQUIRE(lm.landmark.has_value());
    REQUIRE(*lm.landmark == 2.0);
    // D has time == 2, strict inequality drops it
    REQUIRE(lm.survival.size() == 3);
    for (const auto& rec : lm.survival) REQUIRE(rec.time > 2.0);
    // all retained rows are at or before the landmark
    for (const auto& rec : lm.longitudinal) REQUIRE(rec.fuptime <= 2.0);
    REQUIRE(lm.longitudinal.size() == 5);
    REQUIRE(warnings.empty());

    // idempotent: same landmark again changes nothing
    Dataset again = apply_landmark(lm, 2.0, &warnings);
    REQUIRE(equivalent(lm, again));
    // different landmark on landmarked data is an error
    REQUIRE_THROWS_WITH(apply_landmark(lm, 3.0),
                        Catch::Matchers::ContainsSubstring("already landmarked"));
}

TEST_CASE("landmarking drops subjects without usable history, with a warning") {
    CsvTable surv = csv_of("id,time,event\nA,5,1\nE,10,0\n");
    CsvTable longi = csv_of("id,fuptime,bio1\nA,0,1.5\nE,3,2.0\n");
    DatasetSchema schema;
    schema.covariate_columns = {"bio1"};
    Dataset data = load_dataset(surv, longi, schema);
    std::vector<std::string> warnings;
    Dataset lm = apply_landmark(data, 2.0, &warnings);
    REQUIRE(lm.survival.size() == 1);
    REQUIRE(lm.survival[0].id == "A");
    REQUIRE(warnings.size() == 1);
    REQUIRE(warnings[0].find("E") != std::string::npos);
}

TEST_CASE("landmark error when no subject survives past t_L") {
    Dataset data = toy_dataset();
    REQUIRE_THROWS_WITH(apply_landmark(data, 100.0),
                        Catch::Matchers::ContainsSubstring("no subjects remain"));
}

TEST_CASE("kaplan-meier matches hand computation with ties") {
    std::vector<double> times{1, 1, 2, 3, 3, 4, 5};
    std::vector<int> events{1, 0, 1, 1, 1, 0, 1};
    StepFunction km = kaplan_meier(times, events);
    km.validate();
    REQUIRE(km.knots == std::vector<double>{1, 2, 3, 5});
    REQUIRE(km(0.5) == 1.0);
    REQUIRE(km(1.0) == Catch::Approx(6.0 / 7.0).epsilon(1e-14));
    REQUIRE(km(2.5) == Catch::Approx(24.0 / 35.0).epsilon(1e-14));
    REQUIRE(km(3.0) == Catch::Approx(12.0 / 35.0).epsilon(1e-14));
    REQUIRE(km(4.9) == Catch::Approx(12.0 / 35.0).epsilon(1e-14));
    REQUIRE(km(5.0) == 0.0);
}

TEST_CASE("kaplan-meier properties") {
    // no censoring: KM equals the empirical survival function
    std::vector<double> times{3, 1, 4, 1, 5, 9, 2, 6};
    std::vector<int> events(times.size(), 1);
    StepFunction km = kaplan_meier(times, events);
    auto n = static_cast<double>(times.size());
    std::vector<double> sorted = times;
    std::sort(sorted.begin(), sorted.end());
    for (double t : {0.5, 1.0, 1.5, 4.0, 8.9, 9.0}) {
        double count = 0;
        for (double ti : sorted) count += (ti > t) ? 1.0 : 0.0;
        REQUIRE(km(t) == Catch::Approx(count / n).epsilon(1e-14));
    }
    // all censored: no knots, survival stays 1
    std::vector<int> censored(times.size(), 0);
    StepFunction flat = kaplan_meier(times, censored);
    REQUIRE(flat.knots.empty());
    REQUIRE(flat(100.0) == 1.0);
    REQUIRE_THROWS_AS(kaplan_meier({}, {}), Error);
}

TEST_CASE("new subjects resolve levels against training data") {
    Dataset data = toy_dataset();
    auto schema = toy_schema();
    CsvTable base = csv_of("id,age,sex\nN1,55,female\n");
    CsvTable longi = csv_of("id,fuptime,bio1,bio2,age_t\nN1,0,1.0,2.0,55\nN1,1,1.2,,56\n");
    NewSubjects subjects = load_new_subjects(base, longi, schema, data.baseline);
    REQUIRE(subjects.baseline_rows.size() == 1);
    REQUIRE(subjects.baseline_rows[0].baseline[1] == 0.0);  // female
    REQUIRE(subjects.longitudinal.size() == 2);

    CsvTable bad = csv_of("id,age,sex\nN1,55,other\n");
    REQUIRE_THROWS_WITH(load_new_subjects(bad, longi, schema, data.baseline),
                        Catch::Matchers::ContainsSubstring("unknown level 'other'"));
}
