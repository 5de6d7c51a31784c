//! Deterministic in-process interpreter for [`ScriptedWorld`] files.
//!
//! Commands are exactly "verb" (navigation and "look") or "verb noun".
//! Nouns resolve through object names, synonyms, and adjective-augmented
//! names. Identical command sequences from reset always produce identical
//! observation sequences.

use std::collections::HashMap;
use std::sync::Arc;

use super::world::{Effect, ScriptedWorld};
use super::{EnvError, EnvObservation, Environment, FAILURE_RESPONSE};

pub struct ScriptedEnv {
    world: Arc<ScriptedWorld>,
    room_index: HashMap<String, usize>,
    object_index: HashMap<String, usize>,
    room: usize,
    locations: Vec<Option<usize>>,
    extra_exits: HashMap<(usize, String), usize>,
    fired: Vec<bool>,
    score: i64,
}

impl ScriptedEnv {
    /// The world must already be validated (see [`ScriptedWorld::load`]).
    pub fn new(world: Arc<ScriptedWorld>) -> Self {
        let room_index = world
            .rooms
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.clone(), i))
            .collect();
        let object_index = world
            .objects
            .iter()
            .enumerate()
            .map(|(i, o)| (o.id.clone(), i))
            .collect();
        let mut env = ScriptedEnv {
            room: 0,
            locations: Vec::new(),
            extra_exits: HashMap::new(),
            fired: Vec::new(),
            score: 0,
            room_index,
            object_index,
            world,
        };
        env.restore_initial_state();
        env
    }

    pub fn world(&self) -> &ScriptedWorld {
        &self.world
    }

    fn restore_initial_state(&mut self) {
        self.room = self.room_index[&self.world.start_room];
        self.locations = self
            .world
            .objects
            .iter()
            .map(|o| o.location.as_ref().map(|l| self.room_index[l]))
            .collect();
        self.extra_exits.clear();
        self.fired = vec![false; self.world.rules.len()];
        self.score = 0;
    }

    /// Room description plus the printed names of visible objects.
    fn look_text(&self) -> String {
        let mut text = self.world.rooms[self.room].description.clone();
        let visible: Vec<String> = self
            .world
            .objects
            .iter()
            .enumerate()
            .filter(|(i, _)| self.locations[*i] == Some(self.room))
            .map(|(_, o)| display_name(&o.adjectives, &o.name))
            .collect();
        if !visible.is_empty() {
            text.push_str("\nYou can see: ");
            text.push_str(&visible.join(", "));
            text.push('.');
        }
        text
    }

    fn observation(&self, text: String) -> EnvObservation {
        EnvObservation {
            text,
            score: self.score,
            terminal: false,
        }
    }

    /// First visible object whose name, synonym, or adjective-augmented
    /// name matches the phrase, in declaration order.
    fn resolve_object(&self, phrase: &str) -> Option<usize> {
        self.world.objects.iter().enumerate().position(|(i, o)| {
            if self.locations[i] != Some(self.room) {
                return false;
            }
            if o.name == phrase || o.synonyms.iter().any(|s| s == phrase) {
                return true;
            }
            o.adjectives
                .iter()
                .any(|adj| phrase == format!("{adj} {}", o.name))
        })
    }

    fn exit_target(&self, direction: &str) -> Option<usize> {
        if let Some(target) = self.world.rooms[self.room].exits.get(direction) {
            return Some(self.room_index[target]);
        }
        self.extra_exits
            .get(&(self.room, direction.to_string()))
            .copied()
    }

    fn apply_effects(&mut self, effects: &[Effect]) {
        for effect in effects {
            match effect {
                Effect::MoveObject { object, to } => {
                    let idx = self.object_index[object];
                    self.locations[idx] = to.as_ref().map(|t| self.room_index[t]);
                }
                Effect::UnlockExit {
                    room,
                    direction,
                    to,
                } => {
                    self.extra_exits.insert(
                        (self.room_index[room], direction.clone()),
                        self.room_index[to],
                    );
                }
            }
        }
    }
}

impl Environment for ScriptedEnv {
    fn reset(&mut self) -> Result<EnvObservation, EnvError> {
        self.restore_initial_state();
        Ok(self.observation(self.look_text()))
    }

    fn step(&mut self, command: &str) -> Result<EnvObservation, EnvError> {
        let normalized = command.to_lowercase();
        let mut words = normalized.split_whitespace();
        let verb = match words.next() {
            Some(v) => v,
            None => return Ok(self.observation(FAILURE_RESPONSE.to_string())),
        };
        let phrase = words.collect::<Vec<_>>().join(" ");

        if phrase.is_empty() {
            if verb == "look" {
                return Ok(self.observation(self.look_text()));
            }
            if let Some(target) = self.exit_target(verb) {
                self.room = target;
                let text = self.world.rooms[self.room].description.clone();
                return Ok(self.observation(text));
            }
            return Ok(self.observation(FAILURE_RESPONSE.to_string()));
        }

        let object = match self.resolve_object(&phrase) {
            Some(o) => o,
            None => return Ok(self.observation(FAILURE_RESPONSE.to_string())),
        };
        let object_id = self.world.objects[object].id.clone();
        let rule_idx = self.world.rules.iter().position(|rule| {
            rule.verb == verb
                && rule.noun == object_id
                && rule
                    .room
                    .as_ref()
                    .is_none_or(|r| self.room_index[r] == self.room)
        });
        let Some(rule_idx) = rule_idx else {
            return Ok(self.observation(FAILURE_RESPONSE.to_string()));
        };

        let rule = self.world.rules[rule_idx].clone();
        if rule.consumable && self.fired[rule_idx] {
            // Already consumed: same response, no points, no effects.
            return Ok(self.observation(rule.response));
        }
        self.score += rule.points;
        if rule.consumable {
            self.fired[rule_idx] = true;
        }
        self.apply_effects(&rule.effects);
        Ok(self.observation(rule.response))
    }

    fn max_score(&self) -> Option<i64> {
        Some(self.world.max_score)
    }
}

fn display_name(adjectives: &[String], name: &str) -> String {
    if adjectives.is_empty() {
        name.to_string()
    } else {
        format!("{} {}", adjectives.join(" "), name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy_world() -> Arc<ScriptedWorld> {
        Arc::new(
            ScriptedWorld::from_json_str(
                r#"{
                    "name": "toy",
                    "start_room": "den",
                    "max_score": 5,
                    "rooms": [
                        {"id": "den", "description": "A quiet den.",
                         "exits": {"north": "hall"}},
                        {"id": "hall", "description": "A long hall.",
                         "exits": {"south": "den"}}
                    ],
                    "objects": [
                        {"id": "lamp", "name": "lamp", "adjectives": ["brass"],
                         "synonyms": ["lantern"], "location": "den"}
                    ],
                    "rules": [
                        {"verb": "take", "noun": "lamp", "points": 5,
                         "response": "You take the lamp."}
                    ]
                }"#,
            )
            .unwrap(),
        )
    }

    #[test]
    fn reset_returns_declared_opening_text_and_zero_score() {
        let mut env = ScriptedEnv::new(toy_world());
        let obs = env.reset().unwrap();
        assert_eq!(obs.text, "A quiet den.\nYou can see: brass lamp.");
        assert_eq!(obs.score, 0);
        assert!(!obs.terminal);
    }

    #[test]
    fn reset_is_deterministic() {
        let mut env = ScriptedEnv::new(toy_world());
        let first = env.reset().unwrap();
        env.step("take lamp").unwrap();
        let second = env.reset().unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn navigation_moves_to_the_destination_description() {
        let mut env = ScriptedEnv::new(toy_world());
        env.reset().unwrap();
        let obs = env.step("north").unwrap();
        assert_eq!(obs.text, "A long hall.");
        let obs = env.step("look").unwrap();
        assert_eq!(obs.text, "A long hall.");
    }

    #[test]
    fn consumable_rule_awards_points_once_per_episode() {
        let mut env = ScriptedEnv::new(toy_world());
        env.reset().unwrap();
        let first = env.step("take lamp").unwrap();
        assert_eq!(first.score, 5);
        let second = env.step("take lamp").unwrap();
        assert_eq!(second.score, 5);
        // A reset re-arms the rule.
        env.reset().unwrap();
        assert_eq!(env.step("take lamp").unwrap().score, 5);
    }

    #[test]
    fn nouns_resolve_through_synonyms_and_adjectives() {
        let mut env = ScriptedEnv::new(toy_world());
        env.reset().unwrap();
        assert_eq!(env.step("take lantern").unwrap().score, 5);
        env.reset().unwrap();
        assert_eq!(env.step("take brass lamp").unwrap().score, 5);
        env.reset().unwrap();
        assert_eq!(env.step("TAKE LAMP").unwrap().score, 5);
    }

    #[test]
    fn unmatched_commands_return_the_failure_string() {
        let mut env = ScriptedEnv::new(toy_world());
        env.reset().unwrap();
        for cmd in ["eat lamp", "take sword", "west", "frobnicate", ""] {
            let obs = env.step(cmd).unwrap();
            assert_eq!(obs.text, FAILURE_RESPONSE);
            assert_eq!(obs.score, 0);
        }
    }

    #[test]
    fn episode_score_never_exceeds_max_score() {
        let world = toy_world();
        let mut env = ScriptedEnv::new(world.clone());
        env.reset().unwrap();
        for _ in 0..50 {
            let obs = env.step("take lamp").unwrap();
            assert!(obs.score <= world.max_score);
        }
    }

    /// Independent replay oracle: a second, minimal interpreter coded from
    /// the same world data must agree on a long random episode.
    #[test]
    fn random_episode_matches_second_interpreter() {
        let world = toy_world();
        let mut env = ScriptedEnv::new(world.clone());
        env.reset().unwrap();

        // Oracle state for the toy world: current room + lamp taken flag.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let commands = [
            "north", "south", "look", "take lamp", "take lantern", "eat lamp", "west",
        ];
        let mut oracle_room = 0usize; // 0 = den, 1 = hall
        let mut oracle_fired = false;
        let mut oracle_score = 0i64;
        for _ in 0..200 {
            let cmd = commands[rng.random_range(0..commands.len())];
            let obs = env.step(cmd).unwrap();
            match cmd {
                "north" if oracle_room == 0 => oracle_room = 1,
                "south" if oracle_room == 1 => oracle_room = 0,
                "take lamp" | "take lantern" if oracle_room == 0 => {
                    if !oracle_fired {
                        oracle_fired = true;
                        oracle_score += 5;
                    }
                }
                _ => {}
            }
            assert_eq!(obs.score, oracle_score, "command {cmd:?}");
        }
    }

    #[test]
    fn two_step_chain_world_plays_through() {
        let world = Arc::new(
            ScriptedWorld::from_json_str(
                r#"{
                    "name": "chain",
                    "start_room": "cellar",
                    "max_score": 13,
                    "rooms": [
                        {"id": "cellar", "description": "A cold cellar."},
                        {"id": "vault", "description": "A glittering vault.",
                         "exits": {"south": "cellar"}}
                    ],
                    "objects": [
                        {"id": "key", "name": "key", "adjectives": ["iron"], "location": "cellar"},
                        {"id": "door", "name": "door", "adjectives": ["locked"]},
                        {"id": "treasure", "name": "treasure", "location": "vault"}
                    ],
                    "rules": [
                        {"verb": "take", "noun": "key", "points": 2,
                         "response": "Taken. Behind it, a locked door.",
                         "effects": [{"kind": "move_object", "object": "door", "to": "cellar"}]},
                        {"verb": "unlock", "noun": "door", "points": 3,
                         "response": "The lock clicks open.",
                         "effects": [{"kind": "unlock_exit", "room": "cellar",
                                      "direction": "north", "to": "vault"}]},
                        {"verb": "take", "noun": "treasure", "points": 8,
                         "response": "Jewels beyond counting."}
                    ]
                }"#,
            )
            .unwrap(),
        );
        let mut env = ScriptedEnv::new(world);
        env.reset().unwrap();
        // The door is hidden and the exit locked until the chain fires.
        assert_eq!(env.step("unlock door").unwrap().text, FAILURE_RESPONSE);
        assert_eq!(env.step("north").unwrap().text, FAILURE_RESPONSE);
        assert_eq!(env.step("take key").unwrap().score, 2);
        assert_eq!(env.step("unlock door").unwrap().score, 5);
        assert_eq!(env.step("north").unwrap().text, "A glittering vault.");
        assert_eq!(env.step("take treasure").unwrap().score, 13);
    }
}
