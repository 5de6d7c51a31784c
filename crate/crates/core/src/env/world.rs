//! Scripted-world definition: rooms, objects, and (verb, noun) rules with
//! optional state mutations, loaded from a single JSON document.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad world json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("world {world:?}: {message}")]
    Invalid { world: String, message: String },
}

/// A room with exits keyed by navigation verb.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Room {
    pub id: String,
    pub description: String,
    #[serde(default)]
    pub exits: BTreeMap<String, String>,
}

/// An object the player can refer to. `location` is a room id, or absent
/// for objects that enter play later (or never).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorldObject {
    pub id: String,
    pub name: String,
    #[serde(default)]
    pub adjectives: Vec<String>,
    #[serde(default)]
    pub synonyms: Vec<String>,
    #[serde(default)]
    pub location: Option<String>,
}

/// A state mutation applied when a rule fires.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Effect {
    /// Move an object to a room, or out of play when `to` is absent.
    MoveObject {
        object: String,
        #[serde(default)]
        to: Option<String>,
    },
    /// Add an exit from `room` in `direction` to room `to`.
    UnlockExit {
        room: String,
        direction: String,
        to: String,
    },
}

/// A (verb, noun) command handler. `room` restricts where it applies; a
/// consumable rule awards its points once per episode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Rule {
    pub verb: String,
    pub noun: String,
    #[serde(default)]
    pub room: Option<String>,
    #[serde(default)]
    pub points: i64,
    #[serde(default = "default_true")]
    pub consumable: bool,
    pub response: String,
    #[serde(default)]
    pub effects: Vec<Effect>,
}

fn default_true() -> bool {
    true
}

/// A full deterministic world. `max_score` must equal the total points of
/// rules reachable at least once, which `validate` checks by exhaustive
/// search over the mutation graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScriptedWorld {
    pub name: String,
    pub start_room: String,
    pub max_score: i64,
    pub rooms: Vec<Room>,
    pub objects: Vec<WorldObject>,
    pub rules: Vec<Rule>,
}

impl ScriptedWorld {
    pub fn load(path: &Path) -> Result<Self, WorldError> {
        let text = std::fs::read_to_string(path).map_err(|source| WorldError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self, WorldError> {
        let world: ScriptedWorld = serde_json::from_str(text)?;
        world.validate()?;
        Ok(world)
    }

    pub fn room_index(&self) -> HashMap<&str, usize> {
        self.rooms
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.as_str(), i))
            .collect()
    }

    pub fn object_index(&self) -> HashMap<&str, usize> {
        self.objects
            .iter()
            .enumerate()
            .map(|(i, o)| (o.id.as_str(), i))
            .collect()
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let fail = |message: String| WorldError::Invalid {
            world: self.name.clone(),
            message,
        };
        let rooms = self.room_index();
        if rooms.len() != self.rooms.len() {
            return Err(fail("duplicate room ids".to_string()));
        }
        let objects = self.object_index();
        if objects.len() != self.objects.len() {
            return Err(fail("duplicate object ids".to_string()));
        }
        if !rooms.contains_key(self.start_room.as_str()) {
            return Err(fail(format!("start_room {:?} not declared", self.start_room)));
        }
        for room in &self.rooms {
            for (direction, target) in &room.exits {
                if !rooms.contains_key(target.as_str()) {
                    return Err(fail(format!(
                        "exit {direction:?} of room {:?} targets unknown room {target:?}",
                        room.id
                    )));
                }
            }
        }
        for object in &self.objects {
            if let Some(location) = &object.location {
                if !rooms.contains_key(location.as_str()) {
                    return Err(fail(format!(
                        "object {:?} located in unknown room {location:?}",
                        object.id
                    )));
                }
            }
        }
        for (i, rule) in self.rules.iter().enumerate() {
            if !objects.contains_key(rule.noun.as_str()) {
                return Err(fail(format!(
                    "rule {i} references unknown object {:?}",
                    rule.noun
                )));
            }
            if let Some(room) = &rule.room {
                if !rooms.contains_key(room.as_str()) {
                    return Err(fail(format!("rule {i} restricted to unknown room {room:?}")));
                }
            }
            if rule.points < 0 {
                return Err(fail(format!("rule {i} has negative points")));
            }
            if rule.points > 0 && !rule.consumable {
                return Err(fail(format!(
                    "rule {i} awards points but is not consumable; its score would be unbounded"
                )));
            }
            for effect in &rule.effects {
                match effect {
                    Effect::MoveObject { object, to } => {
                        if !objects.contains_key(object.as_str()) {
                            return Err(fail(format!(
                                "rule {i} moves unknown object {object:?}"
                            )));
                        }
                        if let Some(to) = to {
                            if !rooms.contains_key(to.as_str()) {
                                return Err(fail(format!(
                                    "rule {i} moves {object:?} to unknown room {to:?}"
                                )));
                            }
                        }
                    }
                    Effect::UnlockExit { room, to, .. } => {
                        for r in [room, to] {
                            if !rooms.contains_key(r.as_str()) {
                                return Err(fail(format!(
                                    "rule {i} unlocks an exit on unknown room {r:?}"
                                )));
                            }
                        }
                    }
                }
            }
        }

        let consumable_count = self.rules.iter().filter(|r| r.consumable).count();
        if consumable_count > 64 {
            return Err(fail(
                "more than 64 consumable rules; reachability validation unsupported".to_string(),
            ));
        }

        let reachable = self.reachable_consumable_rules(&rooms, &objects)?;
        let computed: i64 = self
            .rules
            .iter()
            .enumerate()
            .filter(|(i, r)| r.consumable && reachable.contains(i))
            .map(|(_, r)| r.points)
            .sum();
        if computed != self.max_score {
            return Err(fail(format!(
                "max_score is {} but the reachable rule points sum to {computed}",
                self.max_score
            )));
        }
        Ok(())
    }

    /// Exhaustive search over (room, object locations, unlocked exits,
    /// fired consumables) to find every consumable rule that can fire.
    fn reachable_consumable_rules(
        &self,
        rooms: &HashMap<&str, usize>,
        objects: &HashMap<&str, usize>,
    ) -> Result<HashSet<usize>, WorldError> {
        const STATE_CAP: usize = 200_000;

        // Consumable rules get bit positions for the fired mask.
        let mut consumable_bit: HashMap<usize, u32> = HashMap::new();
        for (i, rule) in self.rules.iter().enumerate() {
            if rule.consumable {
                let bit = consumable_bit.len() as u32;
                consumable_bit.insert(i, bit);
            }
        }
        // Unlockable exits get bit positions too.
        let mut unlocks: Vec<(usize, String, usize)> = Vec::new();
        for rule in &self.rules {
            for effect in &rule.effects {
                if let Effect::UnlockExit { room, direction, to } = effect {
                    let entry = (rooms[room.as_str()], direction.clone(), rooms[to.as_str()]);
                    if !unlocks.contains(&entry) {
                        unlocks.push(entry);
                    }
                }
            }
        }

        type State = (usize, Vec<Option<usize>>, u64, u64);
        let start: State = (
            rooms[self.start_room.as_str()],
            self.objects
                .iter()
                .map(|o| o.location.as_deref().map(|l| rooms[l]))
                .collect(),
            0,
            0,
        );

        let mut seen: HashSet<State> = HashSet::new();
        let mut queue: VecDeque<State> = VecDeque::new();
        let mut fired: HashSet<usize> = HashSet::new();
        seen.insert(start.clone());
        queue.push_back(start);

        while let Some((room, locations, unlocked, fired_mask)) = queue.pop_front() {
            if seen.len() > STATE_CAP {
                return Err(WorldError::Invalid {
                    world: self.name.clone(),
                    message: format!("reachability search exceeded {STATE_CAP} states"),
                });
            }
            let push = |state: State, seen: &mut HashSet<State>, queue: &mut VecDeque<State>| {
                if seen.insert(state.clone()) {
                    queue.push_back(state);
                }
            };

            // Navigation.
            for target in self.rooms[room].exits.values() {
                push(
                    (rooms[target.as_str()], locations.clone(), unlocked, fired_mask),
                    &mut seen,
                    &mut queue,
                );
            }
            for (bit, (from, _, to)) in unlocks.iter().enumerate() {
                if unlocked & (1 << bit) != 0 && *from == room {
                    push(
                        (*to, locations.clone(), unlocked, fired_mask),
                        &mut seen,
                        &mut queue,
                    );
                }
            }

            // Rules.
            for (i, rule) in self.rules.iter().enumerate() {
                let object = objects[rule.noun.as_str()];
                if locations[object] != Some(room) {
                    continue;
                }
                if let Some(required) = &rule.room {
                    if rooms[required.as_str()] != room {
                        continue;
                    }
                }
                if let Some(&bit) = consumable_bit.get(&i) {
                    if fired_mask & (1 << bit) != 0 {
                        continue;
                    }
                }
                fired.insert(i);
                let mut locations = locations.clone();
                let mut unlocked = unlocked;
                let mut fired_mask = fired_mask;
                if let Some(&bit) = consumable_bit.get(&i) {
                    fired_mask |= 1 << bit;
                }
                for effect in &rule.effects {
                    match effect {
                        Effect::MoveObject { object, to } => {
                            locations[objects[object.as_str()]] =
                                to.as_deref().map(|t| rooms[t]);
                        }
                        Effect::UnlockExit { room, direction, to } => {
                            let entry =
                                (rooms[room.as_str()], direction.clone(), rooms[to.as_str()]);
                            let bit = unlocks.iter().position(|u| *u == entry).unwrap();
                            unlocked |= 1 << bit;
                        }
                    }
                }
                push((room, locations, unlocked, fired_mask), &mut seen, &mut queue);
            }
        }
        Ok(fired)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_world_json() -> String {
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
        }"#
        .to_string()
    }

    #[test]
    fn validates_a_reward_chain_through_mutations() {
        let world = ScriptedWorld::from_json_str(&chain_world_json()).unwrap();
        assert_eq!(world.max_score, 13);
    }

    #[test]
    fn rejects_wrong_max_score() {
        let json = chain_world_json().replace("\"max_score\": 13", "\"max_score\": 14");
        let err = ScriptedWorld::from_json_str(&json).unwrap_err();
        assert!(err.to_string().contains("max_score"));
    }

    #[test]
    fn unreachable_points_are_excluded_from_the_computed_total() {
        // Without the unlock rule, the treasure is unreachable.
        let mut value: serde_json::Value =
            serde_json::from_str(&chain_world_json()).unwrap();
        let rules = value["rules"].as_array_mut().unwrap();
        rules.remove(1);
        value["max_score"] = serde_json::json!(2);
        ScriptedWorld::from_json_str(&value.to_string()).unwrap();
    }

    #[test]
    fn rejects_unknown_references() {
        let bad_exit = chain_world_json().replace("\"south\": \"cellar\"", "\"south\": \"attic\"");
        assert!(ScriptedWorld::from_json_str(&bad_exit).is_err());

        let bad_noun = chain_world_json().replace("\"noun\": \"treasure\"", "\"noun\": \"crown\"");
        assert!(ScriptedWorld::from_json_str(&bad_noun).is_err());
    }

    #[test]
    fn rejects_points_on_nonconsumable_rules() {
        let json = chain_world_json().replace(
            "\"verb\": \"take\", \"noun\": \"treasure\", \"points\": 8",
            "\"verb\": \"take\", \"noun\": \"treasure\", \"points\": 8, \"consumable\": false",
        );
        let err = ScriptedWorld::from_json_str(&json).unwrap_err();
        assert!(err.to_string().contains("unbounded"));
    }
}
