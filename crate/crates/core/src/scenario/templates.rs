//! Built-in script pools, one per scenario class.
//!
//! Every template sits clear of the default analysis thresholds: interjections
//! run past the backchannel length, barge-ins outlast the interrupted tail by
//! more than the continuation window, delayed gaps are at least 3.5 s.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CorpusError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioClass {
    Smooth,
    SuccessfulInterruption,
    Backchannel,
    BargeIn,
    Ceding,
    Delayed,
    Ignored,
    Semantic,
}

impl ScenarioClass {
    pub const ALL: [ScenarioClass; 8] = [
        ScenarioClass::Smooth,
        ScenarioClass::SuccessfulInterruption,
        ScenarioClass::Backchannel,
        ScenarioClass::BargeIn,
        ScenarioClass::Ceding,
        ScenarioClass::Delayed,
        ScenarioClass::Ignored,
        ScenarioClass::Semantic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioClass::Smooth => "smooth",
            ScenarioClass::SuccessfulInterruption => "successful_interruption",
            ScenarioClass::Backchannel => "backchannel",
            ScenarioClass::BargeIn => "barge_in",
            ScenarioClass::Ceding => "ceding",
            ScenarioClass::Delayed => "delayed",
            ScenarioClass::Ignored => "ignored",
            ScenarioClass::Semantic => "semantic",
        }
    }
}

impl fmt::Display for ScenarioClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioClass {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        ScenarioClass::ALL
            .into_iter()
            .find(|c| c.as_str() == key)
            .ok_or_else(|| CorpusError::UnknownClass(s.to_string()))
    }
}

/// Script documents per class.
pub trait TemplateSet: Sync {
    fn pool(&self, class: ScenarioClass) -> &[Value];
}

/// The built-in pools.
#[derive(Debug, Clone)]
pub struct BuiltinTemplates {
    pools: Vec<Vec<Value>>,
}

impl Default for BuiltinTemplates {
    fn default() -> Self {
        BuiltinTemplates {
            pools: ScenarioClass::ALL.into_iter().map(builtin_pool).collect(),
        }
    }
}

impl TemplateSet for BuiltinTemplates {
    fn pool(&self, class: ScenarioClass) -> &[Value] {
        &self.pools[class as usize]
    }
}

/// Pools given explicitly; classes without an entry are empty.
#[derive(Debug, Clone, Default)]
pub struct CustomTemplates {
    pub pools: std::collections::BTreeMap<ScenarioClass, Vec<Value>>,
}

impl TemplateSet for CustomTemplates {
    fn pool(&self, class: ScenarioClass) -> &[Value] {
        self.pools.get(&class).map_or(&[], Vec::as_slice)
    }
}

fn turn(speaker: &str, text: &str) -> Value {
    json!({"speaker": speaker, "text": text})
}

fn script(items: Vec<Value>, event_type: &str, error_type: Option<&str>) -> Value {
    let mut doc = json!({"dialogue": items, "event_type": event_type});
    if let Some(e) = error_type {
        doc["error_type"] = json!(e);
    }
    doc
}

const U: &str = "User";
const A: &str = "Assistant";

fn builtin_pool(class: ScenarioClass) -> Vec<Value> {
    match class {
        ScenarioClass::Smooth => vec![
            script(
                vec![
                    turn(U, "Hi, can you help me reset my router password?"),
                    turn(A, "Of course. Do you have the default login details printed on the device?"),
                    turn(U, "Yes, there is a sticker on the bottom."),
                    turn(A, "Great, open a browser and type the address shown on that sticker."),
                ],
                "Smooth_Turn_Transition",
                None,
            ),
            script(
                vec![
                    turn(U, "What's a good vegetarian dish for a dinner party?"),
                    turn(A, "A mushroom risotto is easy to scale and most guests enjoy it."),
                    turn(U, "How long does it take to cook?"),
                    turn(A, "About forty minutes including the prep work."),
                ],
                "Smooth_Turn_Transition",
                None,
            ),
            script(
                vec![
                    turn(A, "Welcome back. How did the interview go yesterday?"),
                    turn(U, "Pretty well, I think they liked my portfolio."),
                    turn(A, "That's great news. Did they mention next steps?"),
                ],
                "Smooth_Turn_Transition",
                None,
            ),
            script(
                vec![
                    turn(U, "Remind me what time my flight leaves tomorrow."),
                    turn(A, "Your flight to Denver departs at seven fifteen in the morning."),
                ],
                "Smooth_Turn_Transition",
                None,
            ),
            script(
                vec![
                    turn(U, "Can you convert fifty euros to dollars?"),
                    turn(A, "At today's rate that is roughly fifty four dollars."),
                    turn(U, "And how much is that in pounds?"),
                    turn(A, "It comes to a little under forty three pounds."),
                    turn(U, "Thanks, that helps a lot."),
                ],
                "Smooth_Turn_Transition",
                None,
            ),
        ],
        ScenarioClass::SuccessfulInterruption => vec![
            script(
                vec![
                    turn(U, "How do I find my router's admin page?"),
                    turn(
                        A,
                        "You can reach it through the default gateway address, which is usually 192.168.1.1, [INTERACT] though some models use a different one.",
                    ),
                    turn(U, "Wait, I already tried that address and it didn't load."),
                    turn(A, "In that case let's check the gateway in your network settings."),
                ],
                "Successful_Interruption",
                None,
            ),
            script(
                vec![
                    turn(
                        A,
                        "There are three trains to Boston tomorrow, the first leaves at six [INTERACT] and the next one around nine.",
                    ),
                    turn(U, "Sorry, I meant the day after tomorrow actually."),
                    turn(A, "No problem, let me look up Thursday instead."),
                ],
                "Successful_Interruption",
                None,
            ),
            script(
                vec![
                    turn(U, "Tell me about the museum hours."),
                    turn(
                        A,
                        "The museum is open from ten in the morning until [interrupt] six in the evening on weekdays.",
                    ),
                    turn(U, "Is it open on Sundays though?"),
                    turn(A, "Yes, on Sundays it opens at noon."),
                ],
                "Successful_Interruption",
                None,
            ),
            script(
                vec![
                    turn(
                        A,
                        "To bake the bread you will first need to mix the flour with warm water [INTERACT] and then let it rest.",
                    ),
                    turn(U, "Hold on, how warm should the water be?"),
                    turn(A, "Around body temperature works best."),
                ],
                "Successful_Interruption",
                None,
            ),
        ],
        ScenarioClass::Backchannel => vec![
            script(
                vec![
                    turn(U, "Did my order ship yet?"),
                    turn(
                        A,
                        "Yes, it left the warehouse this morning [BC] and should arrive at your door by Friday afternoon.",
                    ),
                    turn(U, "[BC] Uh-huh."),
                    turn(U, "Great, thanks for checking."),
                ],
                "Backchannel",
                None,
            ),
            script(
                vec![
                    turn(U, "So I was telling my manager about the new project plan [BC]"),
                    turn(A, "[BC] Mm-hmm."),
                    turn(U, "and she wants the first draft ready before the end of next week."),
                    turn(A, "That sounds doable if we start on the outline today."),
                ],
                "Backchannel",
                None,
            ),
            script(
                vec![
                    turn(
                        A,
                        "First preheat the oven to two hundred degrees [BC] and then line a baking tray with some parchment paper.",
                    ),
                    turn(U, "[BC] Okay."),
                    turn(U, "Done, what's next?"),
                ],
                "Backchannel",
                None,
            ),
            script(
                vec![
                    turn(U, "My sister is visiting next month [BC] and I want to plan a day trip somewhere near the coast."),
                    turn(A, "[BC] I see."),
                    turn(A, "A coastal drive to the lighthouse could be a nice option."),
                ],
                "Backchannel",
                None,
            ),
        ],
        ScenarioClass::BargeIn => vec![
            script(
                vec![
                    turn(U, "I'd like to book a table for [PAUSE] four people this Saturday evening."),
                    turn(
                        A,
                        "[barge_in] Sure, I can book a table for you at the Italian place downtown, they have openings at six and at eight thirty.",
                    ),
                    turn(U, "Six works for us."),
                ],
                "Barge_in",
                Some("Inappropriate_Barge_in"),
            ),
            script(
                vec![
                    turn(A, "How can I help you today?"),
                    turn(U, "I was wondering whether [PAUSE] you could recommend a good laptop for editing."),
                    turn(
                        A,
                        "[barge_in] Absolutely, for video editing I would recommend a machine with at least thirty two gigabytes of memory and a dedicated graphics card.",
                    ),
                ],
                "Barge_in",
                Some("Inappropriate_Barge_in"),
            ),
            script(
                vec![
                    turn(U, "Can you tell me [PAUSE] how to get to the train station?"),
                    turn(
                        A,
                        "[barge_in] The train station is about ten minutes away, just walk north on Main Street and turn left at the second light.",
                    ),
                    turn(U, "Thanks, I'll head there now."),
                ],
                "Barge_in",
                Some("Inappropriate_Barge_in"),
            ),
        ],
        ScenarioClass::Ceding => vec![
            script(
                vec![
                    turn(U, "What's the weather like this weekend?"),
                    turn(A, "Saturday looks sunny with highs around [BC] twenty five degrees and a light breeze."),
                    turn(U, "Okay."),
                    turn(A, "Sorry, please go ahead."),
                    turn(U, "No, I was just listening. What about Sunday?"),
                ],
                "Backchannel",
                Some("Overly_Deferential_Ceding"),
            ),
            script(
                vec![
                    turn(
                        A,
                        "To update the app you need to open the settings menu [BC] and then scroll all the way down to the about section.",
                    ),
                    turn(U, "Right."),
                    turn(A, "Oh, did you want to say something?"),
                    turn(U, "No, keep going please."),
                ],
                "Backchannel",
                Some("Overly_Deferential_Ceding"),
            ),
            script(
                vec![
                    turn(U, "Tell me about the gym membership options."),
                    turn(A, "We have a monthly plan and an annual plan [BC] which comes with two free training sessions."),
                    turn(U, "Yeah."),
                    turn(A, "Sorry, I'll stop there."),
                ],
                "Backchannel",
                Some("Overly_Deferential_Ceding"),
            ),
        ],
        ScenarioClass::Delayed => vec![
            script(
                vec![
                    turn(U, "What time does the pharmacy close today?"),
                    json!({"pause": "4.0s"}),
                    turn(A, "The pharmacy closes at nine tonight."),
                ],
                "Smooth_Turn_Transition",
                Some("Delayed_Turn_Transition"),
            ),
            script(
                vec![
                    turn(A, "Is there anything else you need for the trip?"),
                    turn(U, "Yes, can you check if the hotel has parking?"),
                    json!({"pause": "3.8s"}),
                    turn(A, "The hotel offers free parking for guests."),
                ],
                "Smooth_Turn_Transition",
                Some("Delayed_Turn_Transition"),
            ),
            script(
                vec![
                    turn(U, "How many calories are in a banana?"),
                    json!({"pause": 4.5}),
                    turn(A, "A medium banana has about one hundred and five calories."),
                    turn(U, "Thanks."),
                ],
                "Smooth_Turn_Transition",
                Some("Delayed_Turn_Transition"),
            ),
        ],
        ScenarioClass::Ignored => vec![
            script(
                vec![
                    turn(U, "Can you explain the refund policy?"),
                    turn(
                        A,
                        "Refunds are available within thirty days of purchase [user_interrupt_starts] as long as the item is unused and you still have the original receipt with you.",
                    ),
                    turn(U, "[overlaps_assistant] Wait, what about opened items?"),
                    turn(U, "Hello? I asked about opened items."),
                ],
                "Failed_Interruption",
                Some("Ignored_Interruption"),
            ),
            script(
                vec![
                    turn(
                        A,
                        "Let me walk you through all of the steps for [user_interrupt_starts] setting up your new account on the website and in the mobile app.",
                    ),
                    turn(U, "[overlaps_assistant] Sorry, I already have an account."),
                    turn(A, "Once that is done you can log in with your email."),
                ],
                "Failed_Interruption",
                Some("Ignored_Interruption"),
            ),
            script(
                vec![
                    turn(U, "What should I pack for Iceland?"),
                    turn(
                        A,
                        "You will want warm layers and a good waterproof jacket [user_interrupt_starts] plus sturdy hiking boots and a swimsuit for the hot springs.",
                    ),
                    turn(U, "[overlaps_assistant] I'm going in the summer though."),
                    turn(A, "Also bring a reusable water bottle."),
                ],
                "Failed_Interruption",
                Some("Ignored_Interruption"),
            ),
        ],
        ScenarioClass::Semantic => vec![
            script(
                vec![
                    turn(U, "How do I find my router's admin page?"),
                    turn(
                        A,
                        "You can reach it through the default gateway address, which is usually 192.168.1.1, [INTERACT] though some models use a different one.",
                    ),
                    turn(U, "Wait, I already tried that address and it didn't load."),
                    turn(A, "As I was saying, some models use a different default gateway address."),
                ],
                "Successful_Interruption",
                Some("Contextual_Incoherence_After_Interruption"),
            ),
            script(
                vec![
                    turn(U, "Can you recommend a good book about space?"),
                    turn(A, "The best way to cook pasta is in plenty of salted boiling water."),
                    turn(U, "That's not what I asked."),
                ],
                "Smooth_Turn_Transition",
                Some("Contextual_Incoherence"),
            ),
            script(
                vec![
                    turn(
                        A,
                        "Your package will arrive on Tuesday between nine and noon [INTERACT] and the courier will call ahead.",
                    ),
                    turn(U, "Can it be delivered to my office instead?"),
                    turn(A, "The courier will call you before arriving on Tuesday."),
                ],
                "Successful_Interruption",
                Some("Contextual_Incoherence_After_Interruption"),
            ),
            script(
                vec![
                    turn(U, "What's the capital of Australia?"),
                    turn(A, "Kangaroos can hop at speeds of over fifty kilometers per hour."),
                ],
                "Smooth_Turn_Transition",
                Some("Contextual_Incoherence"),
            ),
        ],
    }
}
