//! Synthetic multi-group corpora with planted vocabulary.
//!
//! Every group walks through the same rooms. Each room starts with the dm
//! pasting the room's marker text, followed by player posts whose tokens are
//! drawn from the room's place terms, the group's space terms, per-player
//! signature terms, filler noise and function words. Planted terms get an
//! exact token count (`rate` times the token budget), so the ground truth is
//! known by construction.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Corpus, Post, Role, Timestamp};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedTerm {
    pub term: String,
    /// Fraction of the token budget.
    pub rate: f64,
}

impl PlantedTerm {
    pub fn new(term: impl Into<String>, rate: f64) -> Self {
        Self {
            term: term.into(),
            rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticRoom {
    pub marker_text: String,
    /// Shared by every group, highest rate first.
    pub places: Vec<PlantedTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticPlayer {
    pub id: String,
    /// A term only this player uses, like a character name.
    #[serde(default)]
    pub signature: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticGroup {
    pub id: String,
    pub players: Vec<SyntheticPlayer>,
    /// One list per room; missing trailing rooms have no space terms.
    pub spaces: Vec<Vec<PlantedTerm>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub rooms: Vec<SyntheticRoom>,
    pub groups: Vec<SyntheticGroup>,
    /// Player posts per group per room.
    pub posts_per_room: usize,
    pub min_post_tokens: usize,
    pub max_post_tokens: usize,
    pub filler_vocabulary: Vec<String>,
    /// Fraction of tokens drawn uniformly from the filler vocabulary.
    pub filler_rate: f64,
    /// Fill for whatever the planted terms and filler leave over.
    pub function_words: Vec<String>,
    /// Other groups use a group's space terms at this fraction of its rate.
    pub space_leak: f64,
    /// Place rates vary by group within `rate * (1 ± place_jitter)`; the
    /// offsets cancel across groups so pooled counts stay as planted.
    pub place_jitter: f64,
    /// Fraction of a player's own tokens spent on their signature term.
    pub signature_rate: f64,
    /// Short dm posts per group per room, besides the marker.
    pub dm_flavor_posts: usize,
    /// Player chatter before the first marker.
    pub pregame_posts: usize,
    pub start: Timestamp,
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

const FUNCTION_WORDS: &str = "the a an and of to in is it that we i you he she they this with for \
    on at be was are as but or if so then not our my your his her their there here what";

const FILLER: &str = "maybe think look wait okay right left door wall floor light dark cold \
    warm quiet loud step move hand eyes voice sound smell move run walk stand sit hold \
    throw catch push pull open close high low near far fast slow careful ready plan idea \
    turn back front side corner edge path stone wood metal cloth water fire dust \
    shadow bright damp dry old new small large long short heavy light sharp blunt round \
    square thin thick rough smooth strange odd clear empty full broken whole quick still";

const DESCRIPTION: &str = "you enter a chamber where the air is stale and the walls are carved \
    from ancient stone covered in moss and strange runes that glow faintly in the torchlight \
    while somewhere ahead water drips steadily into a hidden pool and the floor is littered \
    with bones broken weapons and scraps of cloth left by earlier adventurers who never \
    returned from this place of shadows echoes and whispered warnings about what waits";

impl SyntheticSpec {
    /// Five groups of four players through four rooms whose labels are
    /// `goblin-orc-stairs`, `rope-gate-orb`, `troll-grogg-box` and
    /// `coins-dragon-barrier`.
    pub fn four_rooms() -> Self {
        let rooms = [
            (["goblin", "orc", "stairs"], "gatehouse", "spear guard torch banner drum arrow helmet crate shield ladder fence lookout barrel chain horn rat tower"),
            (["rope", "gate", "orb"], "chasm", "bridge cliff lever pulley crystal glow chant altar pit hook anchor wind echo ledge depth plank rune"),
            (["troll", "grogg", "box"], "lair", "club cave lock riddle key chest bargain bones stink snore hide cage meat lid latch hinge sack"),
            (["coins", "dragon", "barrier"], "hoard", "gold wing scale flame treasure ward shimmer jewel crown claw egg smoke sword pile roar heat glyph"),
        ];
        let tail_rates = |i: usize| 0.02 - 0.0003 * i as f64;
        let rooms: Vec<SyntheticRoom> = rooms
            .iter()
            .map(|(top, name, tail)| {
                let mut places = vec![
                    PlantedTerm::new(top[0], 0.10),
                    PlantedTerm::new(top[1], 0.08),
                    PlantedTerm::new(top[2], 0.065),
                ];
                places.extend(
                    words(tail)
                        .into_iter()
                        .enumerate()
                        .map(|(i, t)| PlantedTerm::new(t, tail_rates(i))),
                );
                SyntheticRoom {
                    marker_text: format!("{name} {DESCRIPTION} {} {}", top.join(" "), words(tail).join(" ")),
                    places,
                }
            })
            .collect();
        let space_words = [
            [
                "sneak", "bribe", "climb", "parley", "trade", "swim", "vote", "flee", "pray", "song", "mock", "lure",
            ],
            [
                "fight", "charge", "smash", "burn", "shout", "kick", "blast", "rage", "crush", "howl", "stomp", "brawl",
            ],
            [
                "study", "read", "map", "scroll", "ink", "count", "chart", "measure", "sketch", "note", "clue", "tome",
            ],
            [
                "joke", "dance", "feast", "juggle", "laugh", "poem", "flirt", "wager", "dice", "tune", "prank", "toast",
            ],
            [
                "heal", "bless", "salve", "tend", "bandage", "herb", "potion", "rest", "camp", "vigil", "watch",
                "patrol",
            ],
        ];
        let names = [
            ["edmund", "corwin", "alaric", "bryn"],
            ["tamsin", "oswin", "perrin", "ysolde"],
            ["garrick", "lysa", "marek", "rowan"],
            ["fenwick", "isolde", "jorah", "kestrel"],
            ["dorian", "elowen", "hollis", "wren"],
        ];
        let groups = (0..5)
            .map(|g| SyntheticGroup {
                id: format!("group{}", g + 1),
                players: names[g]
                    .iter()
                    .enumerate()
                    .map(|(p, n)| SyntheticPlayer {
                        id: format!("g{}p{}", g + 1, p + 1),
                        signature: Some(n.to_string()),
                    })
                    .collect(),
                spaces: (0..4)
                    .map(|r| {
                        let w = &space_words[g][r * 3..r * 3 + 3];
                        vec![
                            PlantedTerm::new(w[0], 0.03),
                            PlantedTerm::new(w[1], 0.027),
                            PlantedTerm::new(w[2], 0.024),
                        ]
                    })
                    .collect(),
            })
            .collect();
        SyntheticSpec {
            rooms,
            groups,
            posts_per_room: 60,
            min_post_tokens: 8,
            max_post_tokens: 30,
            filler_vocabulary: words(FILLER),
            filler_rate: 0.10,
            function_words: words(FUNCTION_WORDS),
            space_leak: 0.25,
            place_jitter: 0.0,
            signature_rate: 0.02,
            dm_flavor_posts: 3,
            pregame_posts: 5,
            start: Timestamp::parse("2018-01-06T18:00:00.000Z").expect("valid literal"),
        }
    }

    /// Reads a spec file: JSON when the extension is `.json`, TOML otherwise.
    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: SyntheticSpec = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Spec(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Spec(e.to_string()))?
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("specs always serialize")
    }

    pub fn with_posts_per_room(mut self, n: usize) -> Self {
        self.posts_per_room = n;
        self
    }

    /// The planted label terms of `room`: its first `k` place terms.
    pub fn planted_places(&self, room: usize, k: usize) -> Vec<String> {
        self.rooms[room].places.iter().take(k).map(|p| p.term.clone()).collect()
    }

    /// The planted space terms of (`group`, `room`), highest rate first.
    pub fn planted_spaces(&self, group: usize, room: usize, k: usize) -> Vec<String> {
        self.groups[group]
            .spaces
            .get(room)
            .map(|s| s.iter().take(k).map(|p| p.term.clone()).collect())
            .unwrap_or_default()
    }

    /// Total post count the generator will emit.
    pub fn post_count(&self) -> usize {
        self.groups.len() * (self.pregame_posts + self.rooms.len() * (1 + self.dm_flavor_posts + self.posts_per_room))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Spec(m));
        if self.rooms.is_empty() || self.groups.is_empty() {
            return fail("a synthetic corpus needs at least one room and one group".into());
        }
        if self.min_post_tokens == 0 || self.min_post_tokens > self.max_post_tokens {
            return fail("post token bounds must satisfy 1 <= min <= max".into());
        }
        for (name, v) in [
            ("filler_rate", self.filler_rate),
            ("space_leak", self.space_leak),
            ("place_jitter", self.place_jitter),
            ("signature_rate", self.signature_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return fail(format!("{name} must be in [0, 1]"));
            }
        }
        if self.filler_rate > 0.0 && self.filler_vocabulary.is_empty() {
            return fail("filler_rate > 0 needs a filler vocabulary".into());
        }
        if self.function_words.is_empty() {
            return fail("function_words must not be empty".into());
        }
        let ids: BTreeSet<&str> = self.groups.iter().map(|g| g.id.as_str()).collect();
        if ids.len() != self.groups.len() {
            return fail("group ids must be distinct".into());
        }
        for g in &self.groups {
            if g.players.is_empty() && self.posts_per_room + self.pregame_posts > 0 {
                return fail(format!("group {} has no players", g.id));
            }
            if g.spaces.len() > self.rooms.len() {
                return fail(format!("group {} has space terms for missing rooms", g.id));
            }
        }
        for r in 0..self.rooms.len() {
            for g in 0..self.groups.len() {
                let total = self.planted_rate(g, r) + self.filler_rate;
                if total > 1.0 + 1e-9 {
                    return fail(format!(
                        "planted and filler rates of group {} in room {r} sum to {total:.3} > 1",
                        self.groups[g].id
                    ));
                }
            }
        }
        Ok(())
    }

    fn space_rates(&self, group: usize, room: usize) -> f64 {
        self.groups[group]
            .spaces
            .get(room)
            .map(|s| s.iter().map(|p| p.rate).sum())
            .unwrap_or(0.0)
    }

    /// Largest fraction of a (group, room) budget taken by planted terms.
    fn planted_rate(&self, group: usize, room: usize) -> f64 {
        let places: f64 = self.rooms[room].places.iter().map(|p| p.rate).sum::<f64>() * (1.0 + self.place_jitter);
        let leak: f64 = (0..self.groups.len())
            .filter(|&h| h != group)
            .map(|h| self.space_rates(h, room) * self.space_leak)
            .sum();
        places + self.space_rates(group, room) + leak + self.signature_rate
    }
}

/// Splits `n` in proportion to `weights` by largest remainder; ties go to
/// indices in cyclic order starting at `first`.
fn apportion(n: usize, weights: &[usize], first: usize) -> Vec<usize> {
    let total: usize = weights.iter().sum();
    if total == 0 {
        return vec![0; weights.len()];
    }
    let mut shares: Vec<usize> = weights.iter().map(|&w| n * w / total).collect();
    let mut rest: Vec<(usize, usize)> = weights.iter().enumerate().map(|(i, &w)| (n * w % total, i)).collect();
    let len = weights.len();
    rest.sort_by_key(|&(r, i)| (std::cmp::Reverse(r), (i + len - first % len) % len));
    let missing = n - shares.iter().sum::<usize>();
    for &(_, i) in rest.iter().take(missing) {
        shares[i] += 1;
    }
    shares
}

/// Zero-sum multipliers `1 + jitter * offset` for `n` groups.
fn jitter_multipliers(n: usize, jitter: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut m: Vec<f64> = (0..n)
        .map(|i| {
            let offset = if n == 1 {
                0.0
            } else {
                2.0 * i as f64 / (n - 1) as f64 - 1.0
            };
            1.0 + jitter * offset
        })
        .collect();
    m.shuffle(rng);
    m
}

fn sentence(tokens: &[String]) -> String {
    let mut text = tokens.join(" ");
    if let Some(first) = text.get(0..1) {
        let upper = first.to_uppercase();
        text.replace_range(0..1, &upper);
    }
    text.push('.');
    text
}

/// Generates the corpus described by `spec`; the same seed always yields the
/// same corpus.
pub fn generate_synthetic_corpus(spec: &SyntheticSpec, seed: u64) -> Result<Corpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g_count = spec.groups.len();
    // multipliers[room][term][group]
    let multipliers: Vec<Vec<Vec<f64>>> = spec
        .rooms
        .iter()
        .map(|room| {
            room.places
                .iter()
                .map(|_| jitter_multipliers(g_count, spec.place_jitter, &mut rng))
                .collect()
        })
        .collect();

    let mut posts = Vec::with_capacity(spec.post_count());
    for (g, group) in spec.groups.iter().enumerate() {
        let dm = format!("{}_dm", group.id);
        let mut clock = spec.start.millis();
        let mut index = 0usize;
        let mut push = |posts: &mut Vec<Post>, rng: &mut ChaCha8Rng, author: &str, role: Role, text: String| {
            clock += rng.random_range(5_000..120_000);
            posts.push(Post {
                post_id: format!("{}-{index:05}", group.id),
                group_id: group.id.clone(),
                player_id: author.to_string(),
                role,
                timestamp: Timestamp::from_millis(clock),
                text,
            });
            index += 1;
        };

        for _ in 0..spec.pregame_posts {
            let author = &group.players[rng.random_range(0..group.players.len())].id;
            let n = rng.random_range(spec.min_post_tokens..=spec.max_post_tokens);
            let tokens: Vec<String> = (0..n)
                .map(|_| spec.function_words[rng.random_range(0..spec.function_words.len())].clone())
                .collect();
            push(&mut posts, &mut rng, author, Role::Player, sentence(&tokens));
        }

        for (r, room) in spec.rooms.iter().enumerate() {
            push(&mut posts, &mut rng, &dm, Role::Dm, room.marker_text.clone());

            // authors and sizes first, then the token slots are filled;
            // players take turns so each one's share of every room is even
            let players = group.players.len().max(1);
            let mut authors: Vec<usize> = (0..spec.posts_per_room).map(|i| i % players).collect();
            authors.shuffle(&mut rng);
            let sizes: Vec<usize> = (0..spec.posts_per_room)
                .map(|_| rng.random_range(spec.min_post_tokens..=spec.max_post_tokens))
                .collect();
            let budget: usize = sizes.iter().sum();
            let mut slots: Vec<Vec<Option<String>>> = sizes.iter().map(|&n| vec![None; n]).collect();

            let mut owned: Vec<Vec<(usize, usize)>> = vec![Vec::new(); players];
            for (i, &a) in authors.iter().enumerate() {
                owned[a].extend((0..sizes[i]).map(|k| (i, k)));
            }
            for (a, mine) in owned.iter_mut().enumerate() {
                mine.shuffle(&mut rng);
                let Some(sig) = group.players.get(a).and_then(|p| p.signature.as_ref()) else {
                    continue;
                };
                let n = (spec.signature_rate * mine.len() as f64).round() as usize;
                for (i, k) in mine.drain(..n.min(mine.len())) {
                    slots[i][k] = Some(sig.clone());
                }
            }

            let count = |rate: f64| (rate * budget as f64).round() as usize;
            let mut planted: Vec<(String, usize)> = Vec::new();
            for (t, p) in room.places.iter().enumerate() {
                planted.push((p.term.clone(), count(p.rate * multipliers[r][t][g])));
            }
            for (h, other) in spec.groups.iter().enumerate() {
                let factor = if h == g { 1.0 } else { spec.space_leak };
                if let Some(terms) = other.spaces.get(r) {
                    planted.extend(terms.iter().map(|p| (p.term.clone(), count(p.rate * factor))));
                }
            }
            let mut filler: BTreeMap<&str, usize> = BTreeMap::new();
            for _ in 0..count(spec.filler_rate) {
                let i = rng.random_range(0..spec.filler_vocabulary.len());
                *filler.entry(&spec.filler_vocabulary[i]).or_insert(0) += 1;
            }
            planted.extend(filler.into_iter().map(|(t, n)| (t.to_string(), n)));

            // every planted term is split across players in proportion to
            // their remaining free slots
            let free: Vec<usize> = owned.iter().map(Vec::len).collect();
            let mut bags: Vec<Vec<String>> = vec![Vec::new(); players];
            for (term, n) in planted {
                let first = rng.random_range(0..players);
                let room_left: Vec<usize> = free.iter().zip(&bags).map(|(f, b)| f.saturating_sub(b.len())).collect();
                for (a, share) in apportion(n, &room_left, first).into_iter().enumerate() {
                    bags[a].extend(std::iter::repeat_n(term.clone(), share));
                }
            }
            for (a, bag) in bags.iter_mut().enumerate() {
                if bag.len() > free[a] {
                    return Err(Error::Spec(format!(
                        "group {} room {r}: planted tokens exceed the free slots",
                        group.id
                    )));
                }
                while bag.len() < free[a] {
                    let i = rng.random_range(0..spec.function_words.len());
                    bag.push(spec.function_words[i].clone());
                }
                bag.shuffle(&mut rng);
                for (&(i, k), token) in owned[a].iter().zip(bag.drain(..)) {
                    slots[i][k] = Some(token);
                }
            }

            for (i, post) in slots.into_iter().enumerate() {
                let tokens: Vec<String> = post.into_iter().map(|t| t.expect("all slots filled")).collect();
                let author = group.players[authors[i]].id.clone();
                push(&mut posts, &mut rng, &author, Role::Player, sentence(&tokens));
            }
            for _ in 0..spec.dm_flavor_posts {
                let n = rng.random_range(5..15);
                let tokens: Vec<String> = (0..n)
                    .map(|_| {
                        let pool = if spec.filler_vocabulary.is_empty() {
                            &spec.function_words
                        } else {
                            &spec.filler_vocabulary
                        };
                        pool[rng.random_range(0..pool.len())].clone()
                    })
                    .collect();
                let text = sentence(&tokens);
                push(&mut posts, &mut rng, &dm, Role::Dm, text);
            }
        }
    }
    Ok(Corpus::from_posts(posts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;
    use std::collections::HashMap;

    fn tiny() -> SyntheticSpec {
        SyntheticSpec {
            rooms: vec![SyntheticRoom {
                marker_text: "welcome".into(),
                places: vec![],
            }],
            groups: vec![SyntheticGroup {
                id: "g".into(),
                players: vec![],
                spaces: vec![],
            }],
            posts_per_room: 0,
            min_post_tokens: 1,
            max_post_tokens: 1,
            filler_vocabulary: vec![],
            filler_rate: 0.0,
            function_words: vec!["the".into()],
            space_leak: 0.0,
            place_jitter: 0.0,
            signature_rate: 0.0,
            dm_flavor_posts: 0,
            pregame_posts: 0,
            start: Timestamp::from_millis(0),
        }
    }

    #[test]
    fn one_room_no_players_is_one_dm_post() {
        let c = generate_synthetic_corpus(&tiny(), 1).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.posts()[0].role, Role::Dm);
        assert_eq!(c.posts()[0].text, "welcome");
    }

    #[test]
    fn same_seed_same_corpus() {
        let spec = SyntheticSpec::four_rooms().with_posts_per_room(20);
        let a = generate_synthetic_corpus(&spec, 7).unwrap();
        let b = generate_synthetic_corpus(&spec, 7).unwrap();
        let c = generate_synthetic_corpus(&spec, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), spec.post_count());
    }

    #[test]
    fn planted_term_beats_capped_filler() {
        let mut spec = tiny();
        spec.posts_per_room = 200;
        spec.min_post_tokens = 10;
        spec.max_post_tokens = 10;
        spec.groups[0].players = vec![SyntheticPlayer {
            id: "p".into(),
            signature: None,
        }];
        spec.rooms[0].places = vec![PlantedTerm::new("troll", 0.2)];
        // 20 filler words at 0.05 each on average
        spec.filler_vocabulary = (0..20).map(|i| format!("filler{i}")).collect();
        spec.filler_rate = 1.0 - 0.2;
        let c = generate_synthetic_corpus(&spec, 3).unwrap();
        let mut counts: HashMap<String, usize> = HashMap::new();
        for p in c.posts().iter().filter(|p| p.role == Role::Player) {
            for t in tokenize(&p.text) {
                *counts.entry(t).or_insert(0) += 1;
            }
        }
        assert_eq!(counts["troll"], 400);
        let top = counts
            .iter()
            .max_by_key(|(t, c)| (**c, std::cmp::Reverse((*t).clone())))
            .unwrap();
        assert_eq!(top.0, "troll");
    }

    #[test]
    fn rates_over_one_are_rejected() {
        let mut spec = tiny();
        spec.rooms[0].places = vec![PlantedTerm::new("a", 0.7)];
        spec.filler_rate = 0.4;
        spec.filler_vocabulary = vec!["x".into()];
        assert!(matches!(generate_synthetic_corpus(&spec, 0), Err(Error::Spec(_))));
    }

    #[test]
    fn markers_are_pasted_in_order() {
        let spec = SyntheticSpec::four_rooms().with_posts_per_room(5);
        let c = generate_synthetic_corpus(&spec, 1).unwrap();
        for g in &spec.groups {
            let markers: Vec<&str> = c
                .group_posts(&g.id)
                .filter(|p| p.role == Role::Dm && p.text.len() > 200)
                .map(|p| p.text.as_str())
                .collect();
            let expected: Vec<&str> = spec.rooms.iter().map(|r| r.marker_text.as_str()).collect();
            assert_eq!(markers, expected);
        }
    }

    #[test]
    fn four_rooms_vocabularies_are_disjoint() {
        let spec = SyntheticSpec::four_rooms();
        let base = crate::pipeline::builtin_base();
        let mut planted: Vec<String> = spec
            .rooms
            .iter()
            .flat_map(|r| r.places.iter().map(|p| p.term.clone()))
            .collect();
        for g in &spec.groups {
            planted.extend(g.spaces.iter().flatten().map(|p| p.term.clone()));
            planted.extend(g.players.iter().filter_map(|p| p.signature.clone()));
        }
        let unique: BTreeSet<&String> = planted.iter().collect();
        assert_eq!(unique.len(), planted.len());
        for t in &planted {
            assert!(!base.contains(t), "{t} is a stop word");
            assert!(!spec.filler_vocabulary.contains(t), "{t} is filler");
        }
        assert!(spec.function_words.iter().all(|w| w.len() < 2 || base.contains(w)));
        assert!(spec.rooms.iter().all(|r| r.places.len() == 20));
        spec.validate().unwrap();
    }

    #[test]
    fn specs_load_from_json_and_toml() {
        let dir = tempfile::tempdir().unwrap();
        let spec = SyntheticSpec::four_rooms();
        let json = dir.path().join("spec.json");
        std::fs::write(&json, spec.to_json()).unwrap();
        assert_eq!(SyntheticSpec::load(&json).unwrap(), spec);
        let toml_path = dir.path().join("spec.toml");
        std::fs::write(&toml_path, toml::to_string(&spec).unwrap()).unwrap();
        assert_eq!(SyntheticSpec::load(&toml_path).unwrap(), spec);
    }

    #[test]
    fn apportion_by_largest_remainder() {
        assert_eq!(apportion(10, &[1, 1, 1], 0), vec![4, 3, 3]);
        assert_eq!(apportion(10, &[1, 1, 1], 2), vec![3, 3, 4]);
        assert_eq!(apportion(7, &[0, 2, 5], 1), vec![0, 2, 5]);
        assert_eq!(apportion(3, &[0, 0], 0), vec![0, 0]);
    }

    #[test]
    fn jitter_cancels_across_groups() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = jitter_multipliers(5, 0.4, &mut rng);
        assert!((m.iter().sum::<f64>() - 5.0).abs() < 1e-12);
        assert!(m.iter().all(|x| (0.6 - 1e-12..=1.4 + 1e-12).contains(x)));
    }
}
