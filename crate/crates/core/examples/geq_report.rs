//! Score a few questionnaire responses and print the report with
//! rankings, acceptance ratings and the evaluation rubric.

use mrr::assessment::*;

fn main() {
    let csv = "\
respondent,condition,item_1,item_2,item_3,item_4,item_5,item_6,item_7,item_8,item_9,item_10,item_11,item_12,item_13,item_14
a,PC,3,4,1,2,3,2,1,2,3,4,3,2,2,3
b,PC,2,3,1,3,4,2,1,3,3,3,3,2,3,4
a,MR,4,4,2,3,4,2,2,2,3,4,4,3,3,4
b,MR,4,3,1,4,4,3,2,1,4,4,4,4,3,4
";
    let responses = read_responses(csv.as_bytes(), "inline").unwrap();
    let doc = Assessment {
        stats: aggregate_all(&responses).unwrap(),
        rankings: parse_rankings("a patient-role: MixedReality > PC > ClassicalTherapy").unwrap(),
        acceptance: vec![ConditionAcceptance {
            condition: Condition::MixedReality,
            rating: AcceptanceRating::new(4, 4, 5, "projector and camera").unwrap(),
        }],
        rubric: Some(EvaluationRubric {
            therapist: TherapistCriteria {
                intervention: YesNo::No,
                habit_change: HabitChange::Moderate,
                setup: Setup::Assistant,
                location: Location::Dedicated,
            },
            patient: PatientCriteria {
                eye_hand_focus: EyeHandFocus::Same,
                invasiveness: Invasiveness::Convenient,
            },
            economical: EconomicalCriteria {
                unitary_cost: UnitaryCost::Below1K,
                extra_resources: YesNo::No,
            },
        }),
    };
    print!("{}", render_report(&doc));
}
