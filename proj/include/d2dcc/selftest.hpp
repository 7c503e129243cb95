#pragma once

#include <ostream>
#include <sstream>
#include <string>

#include "d2dcc/beamforming.hpp"
#include "d2dcc/d2d.hpp"

namespace d2dcc {

// Golden checks against the two worked network examples (K=3 pair exchange
// and K=4 triple exchange): placement, D2D and DL coded messages, and MAC
// constraint counts. Returns true when everything matches.
inline bool run_selftest(std::ostream& os) {
    int failures = 0;
    auto check = [&](bool ok, const std::string& what) {
        os << (ok ? "[ok]   " : "[FAIL] ") << what << "\n";
        if (!ok) ++failures;
    };

    // --- K=3, N=3, M=1 (tau=1, L=2) ---
    {
        PlacementMap pm = place(3, 3, 1, 1);
        std::ostringstream z1;
        for (const SubfileId& s : pm.cache_of(1)) z1 << s.to_string() << " ";
        check(z1.str() == "A_1 B_1 C_1 ", "K=3 cache of user 1 is {A_1, B_1, C_1}");

        Demands demands = Demands::distinct(3);
        D2DSchedule schedule;
        add_group(schedule, UserSet::of({1, 2}), demands, pm);
        check(schedule.groups[0].transmissions.size() == 2 &&
                  schedule.groups[0].transmissions[0].message.to_string() == "B_1" &&
                  schedule.groups[0].transmissions[1].message.to_string() == "A_2",
              "K=3 D2D pair {1,2}: user 1 sends B_1, user 2 sends A_2");

        MessagePlan plan = remaining_message_plan(schedule, demands, pm);
        check(plan.messages.size() == 2 && plan.messages[0] == UserSet::of({1, 3}) &&
                  plan.messages[1] == UserSet::of({2, 3}),
              "K=3 remaining DL index set is {{1,3},{2,3}}");

        CodedMessage x13 = dl_coded_message(UserSet::of({1, 3}), demands, pm, schedule.ledger);
        CodedMessage x23 = dl_coded_message(UserSet::of({2, 3}), demands, pm, schedule.ledger);
        check(x13.to_string() == "A_3 (+) C_1", "K=3 DL message X_{1,3} = A_3 (+) C_1");
        check(x23.to_string() == "B_3 (+) C_2", "K=3 DL message X_{2,3} = B_3 (+) C_2");
        check(subfile_size(3, 1, 2) == 1.0 / 3.0, "K=3 subfile size F/3");
    }

    // --- K=4, N=4, M=2 (tau=2, L=2) ---
    {
        PlacementMap pm = place(4, 4, 2, 2);
        Demands demands = Demands::distinct(4);
        check(pm.subfiles_per_file() == 6, "K=4 files split into 6 subfiles");

        D2DSchedule schedule;
        add_group(schedule, UserSet::of({1, 2, 3}), demands, pm);
        const auto& tx = schedule.groups[0].transmissions;
        check(tx.size() == 3 && tx[0].transmitter == 1 &&
                  tx[0].message.to_string() == "B^1_{1,3} (+) C^1_{1,2}",
              "K=4 D2D: user 1 multicasts B^1_{1,3} (+) C^1_{1,2}");
        check(tx.size() == 3 && tx[1].transmitter == 2 &&
                  tx[1].message.to_string() == "A^1_{2,3} (+) C^2_{1,2}",
              "K=4 D2D: user 2 multicasts A^1_{2,3} (+) C^2_{1,2}");
        check(tx.size() == 3 && tx[2].transmitter == 3 &&
                  tx[2].message.to_string() == "A^2_{2,3} (+) B^2_{1,3}",
              "K=4 D2D: user 3 multicasts A^2_{2,3} (+) B^2_{1,3}");

        MessagePlan plan = remaining_message_plan(schedule, demands, pm);
        check(plan.messages.size() == 3 && plan.messages[0] == UserSet::of({1, 2, 4}) &&
                  plan.messages[1] == UserSet::of({1, 3, 4}) &&
                  plan.messages[2] == UserSet::of({2, 3, 4}),
              "K=4 remaining DL index set is {{1,2,4},{1,3,4},{2,3,4}}");

        CodedMessage x124 = dl_coded_message(UserSet::of({1, 2, 4}), demands, pm, schedule.ledger);
        CodedMessage x134 = dl_coded_message(UserSet::of({1, 3, 4}), demands, pm, schedule.ledger);
        CodedMessage x234 = dl_coded_message(UserSet::of({2, 3, 4}), demands, pm, schedule.ledger);
        check(x124.to_string() == "A_{2,4} (+) B_{1,4} (+) D_{1,2}",
              "K=4 DL message X_{1,2,4} = A_{2,4} (+) B_{1,4} (+) D_{1,2}");
        check(x134.to_string() == "A_{3,4} (+) C_{1,4} (+) D_{1,3}",
              "K=4 DL message X_{1,3,4} = A_{3,4} (+) C_{1,4} (+) D_{1,3}");
        check(x234.to_string() == "B_{3,4} (+) C_{2,4} (+) D_{2,3}",
              "K=4 DL message X_{2,3,4} = B_{3,4} (+) C_{2,4} (+) D_{2,3}");

        auto macs = enumerate_mac_constraints(plan);
        int per_user[5] = {0, 0, 0, 0, 0};
        for (const auto& c : macs) ++per_user[c.user];
        check(per_user[1] == 3 && per_user[2] == 3 && per_user[3] == 3 && per_user[4] == 7 &&
                  macs.size() == 16,
              "K=4 MAC conditions: 3+3+3 for users 1-3, 7 for user 4 (16 total)");
        check(subfile_size(4, 2, 2) == 1.0 / 6.0, "K=4 subfile size F/6");
    }

    os << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
    return failures == 0;
}

}  // namespace d2dcc
