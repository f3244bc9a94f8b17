#include "lmsig/reference_values.h"

#include <stdexcept>

namespace lmsig::reference {

const std::vector<SignalProductionRow>& signal_production_table() {
  static const std::vector<SignalProductionRow> rows = {
    {{CountryGroup::kEnglishSpeaking, ArrivalGroup::kArr0to5, ReputationGroup::kRookie}, {5.2111, 1.1717, 4.9692}},
    {{CountryGroup::kEnglishSpeaking, ArrivalGroup::kArr0to5, ReputationGroup::kLow}, {5.1805, 0.9535, 5.1008}},
    {{CountryGroup::kEnglishSpeaking, ArrivalGroup::kArr0to5, ReputationGroup::kMiddle}, {5.5999, 0.9063, 5.4669}},
    {{CountryGroup::kEnglishSpeaking, ArrivalGroup::kArr0to5, ReputationGroup::kHigh}, {6.2544, 0.9294, 6.7678}},
    {{CountryGroup::kEnglishSpeaking, ArrivalGroup::kArr5to45, ReputationGroup::kRookie}, {5.1873, 1.4194, 5.0741}},
    {{CountryGroup::kEnglishSpeaking, ArrivalGroup::kArr5to45, ReputationGroup::kLow}, {5.3489, 0.9935, 5.4480}},
    {{CountryGroup::kEnglishSpeaking, ArrivalGroup::kArr5to45, ReputationGroup::kMiddle}, {5.7269, 1.0186, 6.2796}},
    {{CountryGroup::kEnglishSpeaking, ArrivalGroup::kArr5to45, ReputationGroup::kHigh}, {6.1702, 0.8755, 7.2451}},
    {{CountryGroup::kEnglishSpeaking, ArrivalGroup::kArrOver45, ReputationGroup::kRookie}, {5.4206, 1.4663, 5.4354}},
    {{CountryGroup::kEnglishSpeaking, ArrivalGroup::kArrOver45, ReputationGroup::kLow}, {5.5169, 1.1272, 6.3270}},
    {{CountryGroup::kEnglishSpeaking, ArrivalGroup::kArrOver45, ReputationGroup::kMiddle}, {6.0147, 1.1176, 5.6003}},
    {{CountryGroup::kEnglishSpeaking, ArrivalGroup::kArrOver45, ReputationGroup::kHigh}, {6.3107, 1.0451, 5.8462}},
    {{CountryGroup::kSouthAsia, ArrivalGroup::kSpikeArrival, ReputationGroup::kRookie}, {4.7802, 0.9846, 5.2454}},
    {{CountryGroup::kSouthAsia, ArrivalGroup::kSpikeArrival, ReputationGroup::kLow}, {5.3942, 0.9931, 4.4702}},
    {{CountryGroup::kSouthAsia, ArrivalGroup::kSpikeArrival, ReputationGroup::kMiddle}, {5.7699, 0.9086, 5.3539}},
    {{CountryGroup::kSouthAsia, ArrivalGroup::kSpikeArrival, ReputationGroup::kHigh}, {6.2295, 0.9307, 6.1613}},
    {{CountryGroup::kEurope, ArrivalGroup::kArr0to5, ReputationGroup::kRookie}, {4.5927, 0.8225, 5.2863}},
    {{CountryGroup::kEurope, ArrivalGroup::kArr0to5, ReputationGroup::kLow}, {4.6897, 0.7020, 4.4453}},
    {{CountryGroup::kEurope, ArrivalGroup::kArr0to5, ReputationGroup::kMiddle}, {5.0208, 0.7308, 4.6880}},
    {{CountryGroup::kEurope, ArrivalGroup::kArr0to5, ReputationGroup::kHigh}, {6.0213, 1.0247, 5.1050}},
    {{CountryGroup::kEurope, ArrivalGroup::kArr5to45, ReputationGroup::kRookie}, {4.5472, 1.1618, 5.6753}},
    {{CountryGroup::kEurope, ArrivalGroup::kArr5to45, ReputationGroup::kLow}, {4.9199, 0.8154, 5.4259}},
    {{CountryGroup::kEurope, ArrivalGroup::kArr5to45, ReputationGroup::kMiddle}, {5.3074, 0.8330, 6.1675}},
    {{CountryGroup::kEurope, ArrivalGroup::kArr5to45, ReputationGroup::kHigh}, {6.3297, 1.1756, 6.9104}},
    {{CountryGroup::kEurope, ArrivalGroup::kArrOver45, ReputationGroup::kRookie}, {4.6517, 1.1846, 6.0705}},
    {{CountryGroup::kEurope, ArrivalGroup::kArrOver45, ReputationGroup::kLow}, {5.0596, 1.0470, 5.6789}},
    {{CountryGroup::kEurope, ArrivalGroup::kArrOver45, ReputationGroup::kMiddle}, {5.5739, 0.9554, 6.1728}},
    {{CountryGroup::kEurope, ArrivalGroup::kArrOver45, ReputationGroup::kHigh}, {6.6537, 1.1701, 6.9725}},
    {{CountryGroup::kNotSouthAsiaSpike, ArrivalGroup::kSpikeArrival, ReputationGroup::kRookie}, {4.6156, 1.0477, 5.0425}},
    {{CountryGroup::kNotSouthAsiaSpike, ArrivalGroup::kSpikeArrival, ReputationGroup::kLow}, {4.9764, 0.8346, 4.2831}},
    {{CountryGroup::kNotSouthAsiaSpike, ArrivalGroup::kSpikeArrival, ReputationGroup::kMiddle}, {5.2227, 0.8055, 5.0128}},
    {{CountryGroup::kNotSouthAsiaSpike, ArrivalGroup::kSpikeArrival, ReputationGroup::kHigh}, {6.0927, 1.0559, 6.4536}},
    {{CountryGroup::kOther, ArrivalGroup::kArr0to5, ReputationGroup::kRookie}, {4.0601, 1.1871, 4.1066}},
    {{CountryGroup::kOther, ArrivalGroup::kArr0to5, ReputationGroup::kLow}, {4.7517, 0.9304, 4.1335}},
    {{CountryGroup::kOther, ArrivalGroup::kArr0to5, ReputationGroup::kMiddle}, {5.2746, 0.9032, 4.8462}},
    {{CountryGroup::kOther, ArrivalGroup::kArr0to5, ReputationGroup::kHigh}, {5.5763, 0.9233, 5.3316}},
    {{CountryGroup::kOther, ArrivalGroup::kArr5to45, ReputationGroup::kRookie}, {3.7847, 1.1601, 5.6961}},
    {{CountryGroup::kOther, ArrivalGroup::kArr5to45, ReputationGroup::kLow}, {4.9349, 1.0965, 4.8759}},
    {{CountryGroup::kOther, ArrivalGroup::kArr5to45, ReputationGroup::kMiddle}, {5.4756, 1.0151, 6.0390}},
    {{CountryGroup::kOther, ArrivalGroup::kArr5to45, ReputationGroup::kHigh}, {5.8741, 1.0250, 6.1553}},
    {{CountryGroup::kOther, ArrivalGroup::kArrOver45, ReputationGroup::kRookie}, {4.3500, 1.3188, 4.7674}},
    {{CountryGroup::kOther, ArrivalGroup::kArrOver45, ReputationGroup::kLow}, {5.3846, 1.2021, 5.6008}},
    {{CountryGroup::kOther, ArrivalGroup::kArrOver45, ReputationGroup::kMiddle}, {5.7417, 1.0618, 6.0590}},
    {{CountryGroup::kOther, ArrivalGroup::kArrOver45, ReputationGroup::kHigh}, {5.8750, 0.9856, 6.5123}},
    {{CountryGroup::kSouthAsia, ArrivalGroup::kArr0to5, ReputationGroup::kRookie}, {4.5308, 1.0540, 4.7143}},
    {{CountryGroup::kSouthAsia, ArrivalGroup::kArr0to5, ReputationGroup::kLow}, {5.2677, 0.9807, 4.7612}},
    {{CountryGroup::kSouthAsia, ArrivalGroup::kArr0to5, ReputationGroup::kMiddle}, {5.7227, 0.9227, 5.3834}},
    {{CountryGroup::kSouthAsia, ArrivalGroup::kArr0to5, ReputationGroup::kHigh}, {6.2374, 0.9298, 6.1692}},
    {{CountryGroup::kSouthAsia, ArrivalGroup::kArr5to45, ReputationGroup::kRookie}, {4.5044, 1.0218, 5.3035}},
    {{CountryGroup::kSouthAsia, ArrivalGroup::kArr5to45, ReputationGroup::kLow}, {5.2615, 1.0102, 5.4920}},
    {{CountryGroup::kSouthAsia, ArrivalGroup::kArr5to45, ReputationGroup::kMiddle}, {5.7368, 0.9759, 6.1759}},
    {{CountryGroup::kSouthAsia, ArrivalGroup::kArr5to45, ReputationGroup::kHigh}, {6.2108, 0.9683, 6.8218}},
    {{CountryGroup::kSouthAsia, ArrivalGroup::kArrOver45, ReputationGroup::kRookie}, {4.7418, 1.1185, 5.4906}},
    {{CountryGroup::kSouthAsia, ArrivalGroup::kArrOver45, ReputationGroup::kLow}, {5.4996, 1.0629, 5.4358}},
    {{CountryGroup::kSouthAsia, ArrivalGroup::kArrOver45, ReputationGroup::kMiddle}, {5.8716, 1.0001, 6.0273}},
    {{CountryGroup::kSouthAsia, ArrivalGroup::kArrOver45, ReputationGroup::kHigh}, {6.3032, 1.0000, 7.1680}},
  };
  return rows;
}

SignalProduction signal_production(const ObservableGroup& g) {
  for (const auto& row : signal_production_table())
    if (row.group == g) return row.production;
  throw std::invalid_argument("no reference signal production for group");
}

}  // namespace lmsig::reference
