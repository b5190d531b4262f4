#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "hopfield/matrix_analysis.hpp"
#include "hopfield/model.hpp"
#include "hopfield/simulator.hpp"

namespace hopfield {

// Three-neuron reference networks with unbounded delays and distributed-delay
// kernels, shipped as ready-to-run configs. The first has bounded activations
// and a reducible singular criterion matrix; the second has unbounded
// (sublinear) activations and an irreducible singular criterion matrix.

namespace detail {

inline constexpr const char* example_4_1_json = R"json({
  "name": "example-4.1",
  "n": 3, "P": 2,
  "check_start": 1,
  "a": ["cos(pi*m)/6", "1/(m+1)", "1/2"],
  "nu": ["1", "2", "3"],
  "b": [
    [["0","0"], ["sin(pi*m/2)/6","cos(pi*m)/6"], ["0","0"]],
    [["0","0"], ["sin(pi*m/2)/3","0"],           ["0","cos(pi*m)/6"]],
    [["0","0"], ["0","0"],                       ["1/(2*(1+exp(-m))) - 1/4","0"]]
  ],
  "tau": [
    [["0","0"], ["floor(m/4)","1"], ["0","0"]],
    [["0","0"], ["2","0"],          ["0","3"]],
    [["0","0"], ["0","0"],          ["3","0"]]
  ],
  "c": [
    ["2/3*tanh(m)", "0", "0"],
    ["0", "0", "2/3*cos(pi*m)"],
    ["0", "0", "cos(pi*m)"]
  ],
  "zeta": [
    [{"form":"telescoping_inverse_quadratic","total":1}, null, null],
    [null, null, {"form":"geometric","params":{"ratio":"1/2","scale":"1/2"},"total":1}],
    [null, null, {"form":"geometric","params":{"ratio":"1/2","scale":"1/2"},"total":1}]
  ],
  "f": [
    [null, [{"expr":"min(arctan(abs(u)),1)","bound":1,"regime":"bounded"},
            {"expr":"min(arctan(abs(u)),1)","bound":1,"regime":"bounded"}], null],
    [null, [{"expr":"tanh(u)","bound":1,"regime":"bounded"}, null],
           [null, {"expr":"tanh(u)","bound":1,"regime":"bounded"}]],
    [null, null, [{"expr":"u/sqrt(1+u^2)","bound":1,"regime":"bounded"}, null]]
  ],
  "g": [
    [{"expr":"1/(1+exp(-u)) - 1/2","bound":"1/4","regime":"bounded"}, null, null],
    [null, null, {"expr":"1/(1+exp(-u)) - 1/2","bound":"1/4","regime":"bounded"}],
    [null, null, {"expr":"1/(1+exp(-u)) - 1/2","bound":"1/4","regime":"bounded"}]
  ],
  "I": [
    {"expr":"1/(m+1)^2", "certificate":{"type":"p_series","p":2}},
    {"expr":"(1/2)^m",   "certificate":{"type":"geometric","ratio":"1/2"}},
    {"expr":"1/(m+1)^5", "certificate":{"type":"p_series","p":5}}
  ],
  "declared": {
    "a_sup":    ["1/6", "1/2", "1/2"],
    "a_limsup": ["1/6", 0,     "1/2"],
    "b_sup": [
      [null, ["1/6","1/6"], null],
      [null, ["1/3",null],  [null,"1/6"]],
      [null, null,          ["1/4",null]]
    ],
    "b_limsup": [
      [null, ["1/6","1/6"], null],
      [null, ["1/3",null],  [null,"1/6"]],
      [null, null,          ["1/4",null]]
    ],
    "c_sup":    [["2/3",null,null], [null,null,"2/3"], [null,null,"1"]],
    "c_limsup": [["2/3",null,null], [null,null,"2/3"], [null,null,"1"]]
  },
  "notes": [
    "|a_2(0)| = 1 touches the strict leakage bound at m = 0; checks start at m = 1 and the declared limsup of a_2 is 0"
  ]
})json";

inline constexpr const char* example_4_2_json = R"json({
  "name": "example-4.2",
  "n": 3, "P": 2,
  "a": ["2/3*cos(pi*m)", "1/3*sin(pi*m/2)", "2/3*sin(pi*m/2)"],
  "nu": ["1", "3", "4"],
  "b": [
    [["0","0"],              ["1/9","1/9*cos(pi*m)"], ["0","0"]],
    [["1/9*sin(pi*m/2)","0"],["0","0"],               ["1/4","0"]],
    [["0","0"],              ["1/12*cos(pi*m)","0"],  ["0","0"]]
  ],
  "tau": [
    [["0","0"], ["0","floor(m/3)"], ["0","0"]],
    [["1","0"], ["0","0"],          ["5","0"]],
    [["0","0"], ["floor(m/4)","0"], ["0","0"]]
  ],
  "c": [
    ["0", "1/9", "0"],
    ["2/9", "0", "1/12"],
    ["0", "1/4*sin(pi*m/2)", "0"]
  ],
  "zeta": [
    [null, {"form":"geometric","params":{"ratio":"1/2","scale":"1/2"},"total":1}, null],
    [{"form":"geometric","params":{"ratio":"1/2","scale":"1/2"},"total":1}, null,
     {"form":"geometric","params":{"ratio":"1/2","scale":"1/2"},"total":1}],
    [null, {"form":"geometric","params":{"ratio":"1/2","scale":"1/2"},"total":1}, null]
  ],
  "f": [
    [null, [{"expr":"arctan(u)","bound":1,"regime":"sublinear"},
            {"expr":"max(tanh(abs(u)), u - 1/10)","bound":1,"regime":"sublinear"}], null],
    [[{"expr":"max(tanh(abs(u)), u - 1/10)","bound":1,"regime":"sublinear"}, null], null,
     [{"expr":"tanh(u)","bound":1,"regime":"sublinear"}, null]],
    [null, [{"expr":"tanh(u)","bound":1,"regime":"sublinear"}, null], null]
  ],
  "g": [
    [null, {"expr":"tanh(u)","bound":1,"regime":"sublinear"}, null],
    [{"expr":"tanh(u)","bound":1,"regime":"sublinear"}, null,
     {"expr":"tanh(u)","bound":1,"regime":"sublinear"}],
    [null, {"expr":"tanh(u)","bound":1,"regime":"sublinear"}, null]
  ],
  "I": [
    {"expr":"1/(m+1)^2", "certificate":{"type":"p_series","p":2}},
    {"expr":"(1/2)^m",   "certificate":{"type":"geometric","ratio":"1/2"}},
    {"expr":"1/(m+1)^3", "certificate":{"type":"p_series","p":3}}
  ],
  "declared": {
    "a_sup":    ["2/3", "1/3", "2/3"],
    "a_limsup": ["2/3", "1/3", "2/3"],
    "b_sup": [
      [null, ["1/9","1/9"], null],
      [["1/9",null], null,  ["1/4",null]],
      [null, ["1/12",null], null]
    ],
    "b_limsup": [
      [null, ["1/9","1/9"], null],
      [["1/9",null], null,  ["1/4",null]],
      [null, ["1/12",null], null]
    ],
    "c_sup":    [[null,"1/9",null], ["2/9",null,"1/12"], [null,"1/4",null]],
    "c_limsup": [[null,"1/9",null], ["2/9",null,"1/12"], [null,"1/4",null]]
  }
})json";

}  // namespace detail

enum class reference_matrix_kind { hat, plus };

struct builtin_example {
    std::string_view name;
    const char* config_json;
    reference_matrix_kind ref_kind;  // which criterion matrix the reference values pin
    double ref[3][3];
    const char* summary;
};

inline const std::vector<builtin_example>& builtin_examples() {
    static const std::vector<builtin_example> table = {
        {"example-4.1",
         detail::example_4_1_json,
         reference_matrix_kind::hat,
         {{2.0 / 3.0, -1.0 / 3.0, 0.0}, {0.0, 2.0 / 3.0, -1.0 / 3.0}, {0.0, 0.0, 0.0}},
         "bounded activations; limsup matrix is a (reducible) singular M-matrix"},
        {"example-4.2",
         detail::example_4_2_json,
         reference_matrix_kind::plus,
         {{1.0 / 3.0, -1.0 / 3.0, 0.0}, {-1.0 / 3.0, 2.0 / 3.0, -1.0 / 3.0}, {0.0, -1.0 / 3.0, 1.0 / 3.0}},
         "sublinear (unbounded) activations; sup matrix is a singular irreducible M-matrix"},
    };
    return table;
}

inline const builtin_example* find_builtin(std::string_view name) {
    for (const auto& e : builtin_examples())
        if (e.name == name) return &e;
    return nullptr;
}

inline bool is_builtin(std::string_view name) { return find_builtin(name) != nullptr; }

inline model_spec load_builtin(std::string_view name) {
    const builtin_example* e = find_builtin(name);
    if (!e) throw config_error("unknown builtin example '" + std::string(name) + "'");
    return load_model(e->config_json);
}

inline square_matrix builtin_reference_matrix(const builtin_example& e) {
    square_matrix m(3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m.at(i, j) = e.ref[i][j];
    return m;
}

/// The pre-history used by both reference examples:
/// psi(s) = (sin s, -cos s, e^s) for s in [-9, 0], zero earlier, sigma = 0.
inline initial_condition builtin_initial_condition() {
    initial_condition ic;
    ic.sigma = 0;
    ic.tail = {0.0, 0.0, 0.0};
    for (long s = -9; s <= 0; ++s) {
        double sd = static_cast<double>(s);
        ic.support.push_back({std::sin(sd), -std::cos(sd), std::exp(sd)});
    }
    return ic;
}

}  // namespace hopfield
