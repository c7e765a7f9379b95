#include "videoqg/diversity.hpp"

#include <unordered_map>

namespace videoqg {

namespace {

// Compact bundled lexicon of common English nouns and verbs (base forms plus
// frequent inflections that the suffix rules would misread).
const char* const kNouns[] = {
    "time", "year", "people", "way", "day", "man", "thing", "woman", "life", "child",
    "world", "school", "state", "family", "student", "group", "country", "problem", "hand",
    "part", "place", "case", "week", "company", "system", "program", "question", "work",
    "government", "number", "night", "point", "home", "water", "room", "mother", "area",
    "money", "story", "fact", "month", "lot", "right", "study", "book", "eye", "job",
    "word", "business", "issue", "side", "kind", "head", "house", "service", "friend",
    "father", "power", "hour", "game", "line", "end", "member", "law", "car", "city",
    "community", "name", "president", "team", "minute", "idea", "kid", "body", "information",
    "back", "parent", "face", "others", "level", "office", "door", "health", "person", "art",
    "war", "history", "party", "result", "change", "morning", "reason", "research", "girl",
    "guy", "moment", "air", "teacher", "force", "education", "foot", "boy", "age", "policy",
    "music", "market", "sense", "nation", "plan", "college", "interest", "death", "experience",
    "effect", "use", "class", "control", "care", "field", "development", "role", "effort",
    "rate", "heart", "drug", "show", "leader", "light", "voice", "wife", "police", "mind",
    "price", "report", "decision", "son", "view", "relationship", "town", "road", "arm",
    "difference", "value", "building", "action", "model", "season", "society", "tax",
    "director", "position", "player", "record", "paper", "space", "ground", "form", "event",
    "official", "matter", "center", "couple", "site", "project", "activity", "star", "table",
    "court", "oil", "situation", "cost", "industry", "figure", "street", "image", "phone",
    "data", "picture", "practice", "piece", "land", "product", "doctor", "wall", "patient",
    "worker", "news", "test", "movie", "north", "love", "support", "technology", "step",
    "baby", "computer", "type", "attention", "film", "tree", "source", "subject", "rule",
    "bill", "chance", "dog", "cat", "horse", "bird", "fish", "window", "chair", "bed",
    "kitchen", "bedroom", "bathroom", "garden", "yard", "fence", "roof", "floor", "ceiling",
    "stair", "hall", "hallway", "closet", "desk", "lamp", "couch", "sofa", "shelf", "mirror",
    "clock", "radio", "television", "remote", "bottle", "glass", "cup", "mug", "plate",
    "bowl", "fork", "knife", "spoon", "pan", "pot", "oven", "stove", "fridge", "freezer",
    "sink", "towel", "soap", "shampoo", "brush", "comb", "razor", "toothbrush", "medicine",
    "pill", "bandage", "blanket", "pillow", "sheet", "curtain", "carpet", "rug", "vase",
    "flower", "plant", "grass", "leaf", "branch", "root", "seed", "fruit", "apple", "banana",
    "orange", "grape", "lemon", "peach", "pear", "berry", "melon", "tomato", "potato",
    "carrot", "onion", "pepper", "salad", "soup", "bread", "butter", "cheese", "egg", "milk",
    "coffee", "tea", "juice", "wine", "beer", "sugar", "salt", "flour", "rice", "pasta",
    "meat", "chicken", "beef", "pork", "bacon", "sausage", "sandwich", "pizza", "burger",
    "cake", "cookie", "pie", "chocolate", "candy", "snack", "meal", "dinner", "lunch",
    "breakfast", "dessert", "restaurant", "menu", "waiter", "chef", "cook", "bar", "hotel",
    "airport", "station", "train", "bus", "taxi", "bike", "bicycle", "boat", "ship", "plane",
    "ticket", "passport", "luggage", "bag", "suitcase", "wallet", "purse", "key", "lock",
    "map", "camera", "photo", "video", "clip", "screen", "keyboard", "mouse", "laptop",
    "tablet", "battery", "charger", "cable", "wire", "switch", "button", "machine", "engine",
    "wheel", "tire", "brake", "mirror", "seat", "belt", "driver", "passenger", "traffic",
    "bridge", "tunnel", "river", "lake", "ocean", "sea", "beach", "sand", "wave", "island",
    "mountain", "hill", "valley", "forest", "desert", "field", "farm", "barn", "animal",
    "cow", "pig", "sheep", "goat", "duck", "goose", "rabbit", "mouse", "rat", "snake",
    "spider", "insect", "bee", "ant", "fly", "butterfly", "lion", "tiger", "bear", "wolf",
    "fox", "deer", "elephant", "monkey", "whale", "dolphin", "shark", "weather", "rain",
    "snow", "wind", "storm", "cloud", "sun", "moon", "sky", "ice", "fire", "smoke",
    "flame", "ash", "dust", "dirt", "mud", "stone", "rock", "metal", "iron", "gold",
    "silver", "glass", "plastic", "wood", "paper", "cloth", "cotton", "leather", "wool",
    "shirt", "pants", "dress", "skirt", "jacket", "coat", "sweater", "sock", "shoe", "boot",
    "hat", "cap", "glove", "scarf", "tie", "suit", "uniform", "pocket", "zipper", "collar",
    "sleeve", "ring", "necklace", "bracelet", "watch", "glasses", "umbrella", "toy", "doll",
    "ball", "balloon", "kite", "puzzle", "board", "card", "dice", "prize", "gift", "present",
    "party", "birthday", "wedding", "holiday", "vacation", "trip", "journey", "tour", "guide",
    "museum", "gallery", "theater", "stage", "actor", "actress", "audience", "song", "dance",
    "band", "concert", "instrument", "guitar", "piano", "drum", "violin", "flute", "library",
    "page", "letter", "note", "pen", "pencil", "eraser", "marker", "chalk", "notebook",
    "folder", "envelope", "stamp", "package", "box", "basket", "bucket", "jar", "can",
    "lid", "handle", "rope", "chain", "hook", "nail", "screw", "hammer", "drill", "saw",
    "ladder", "tool", "shovel", "broom", "mop", "sponge", "trash", "garbage", "bin",
    "hospital", "nurse", "dentist", "clinic", "ambulance", "emergency", "accident", "injury",
    "wound", "fever", "cold", "cough", "headache", "pain", "stress", "sleep", "dream",
    "nightmare", "memory", "thought", "feeling", "emotion", "smile", "laugh", "tear",
    "anger", "fear", "joy", "hope", "wish", "secret", "truth", "lie", "promise", "excuse",
    "apology", "argument", "fight", "battle", "weapon", "gun", "knife", "sword", "shield",
    "soldier", "army", "navy", "enemy", "victory", "defeat", "peace", "freedom", "justice",
    "judge", "jury", "lawyer", "crime", "thief", "prison", "jail", "guard", "detective",
    "mystery", "clue", "evidence", "witness", "victim", "suspect", "neighbor", "stranger",
    "guest", "visitor", "host", "owner", "boss", "employee", "customer", "client", "partner",
    "husband", "brother", "sister", "uncle", "aunt", "cousin", "nephew", "niece", "grandmother",
    "grandfather", "grandma", "grandpa", "daughter", "twin", "teenager", "adult", "crowd",
    "meeting", "speech", "lecture", "lesson", "exam", "grade", "score", "award", "medal",
    "trophy", "race", "match", "goal", "coach", "referee", "stadium", "gym", "pool",
    "court", "track", "exercise", "sport", "football", "baseball", "basketball", "soccer",
    "tennis", "golf", "hockey",
    "morning", "afternoon", "evening", "midnight", "noon", "sunrise", "sunset", "spring",
    "summer", "autumn", "winter", "north", "south", "east", "west", "corner", "edge",
    "middle", "top", "bottom", "front", "surface", "distance", "direction", "speed",
    "weight", "height", "length", "width", "depth", "size", "shape", "circle", "square",
    "triangle", "angle", "degree", "percent", "half", "quarter", "dozen", "pair", "amount",
    "total", "sum", "average", "limit", "minimum", "maximum", "beginning", "ending",
    "introduction", "conclusion", "section", "chapter", "title", "author", "reader",
    "editor", "reporter", "journalist", "article", "magazine", "newspaper", "channel",
    "network", "website", "internet", "email", "message", "text", "call", "conversation",
    "discussion", "debate", "interview", "announcement", "warning", "signal", "sign",
    "symbol", "code", "password", "account", "profile", "address", "location", "region",
    "district", "province", "capital", "village", "suburb", "downtown", "avenue", "highway",
    "path", "trail", "sidewalk", "crosswalk", "entrance", "exit", "gate", "porch", "balcony",
    "garage", "basement", "attic", "elevator", "escalator", "apartment", "cabin", "castle",
    "palace", "temple", "church", "mosque", "tower", "statue", "fountain", "monument",
    "square", "plaza", "parking", "bench", "playground", "slide", "swing", "sandbox",
    "scene", "action", "actor", "camera", "dialogue", "subtitle", "episode", "series",
    "character", "plot", "ending", "scenery", "frame", "object", "entity", "question",
};

const char* const kVerbs[] = {
    "be", "have", "do", "say", "get", "make", "go", "know", "take", "see", "come", "think",
    "look", "want", "give", "use", "find", "tell", "ask", "work", "seem", "feel", "try",
    "leave", "call", "need", "become", "mean", "keep", "let", "begin", "help", "talk",
    "turn", "start", "show", "hear", "play", "run", "move", "like", "live", "believe",
    "hold", "bring", "happen", "write", "provide", "sit", "stand", "lose", "pay", "meet",
    "include", "continue", "set", "learn", "change", "lead", "understand", "watch", "follow",
    "stop", "create", "speak", "read", "allow", "add", "spend", "grow", "open", "walk",
    "win", "offer", "remember", "love", "consider", "appear", "buy", "wait", "serve", "die",
    "send", "expect", "build", "stay", "fall", "cut", "reach", "kill", "remain", "suggest",
    "raise", "pass", "sell", "require", "report", "decide", "pull", "push", "carry", "break",
    "hope", "receive", "agree", "support", "hit", "produce", "eat", "cover", "catch", "draw",
    "choose", "wear", "fight", "throw", "fill", "drop", "enjoy", "wash", "drive", "sleep",
    "dance", "sing", "jump", "climb", "swim", "fly", "ride", "cook", "bake", "clean",
    "drink", "smile", "laugh", "cry", "shout", "whisper", "listen", "smell", "taste",
    "touch", "point", "wave", "nod", "shake", "bend", "stretch", "lift", "lower", "grab",
    "release", "squeeze", "press", "rub", "scratch", "wipe", "fold", "unfold", "tear",
    "stick", "glue", "tie", "untie", "wrap", "unwrap", "pack", "unpack", "load", "unload",
    "pour", "spill", "mix", "stir", "shake", "boil", "fry", "grill", "roast", "slice",
    "chop", "peel", "serve", "order", "deliver", "ship", "mail", "post", "reply", "answer",
    "repeat", "explain", "describe", "discuss", "argue", "complain", "apologize", "thank",
    "greet", "welcome", "invite", "visit", "arrive", "depart", "return", "travel", "explore",
    "discover", "search", "seek", "hide", "escape", "chase", "catch", "hunt", "fish",
    "gather", "collect", "pick", "plant", "water", "dig", "bury", "harvest", "feed",
    "pet", "train", "teach", "study", "practice", "prepare", "plan", "organize", "arrange",
    "schedule", "cancel", "delay", "postpone", "finish", "complete", "achieve", "succeed",
    "fail", "attempt", "compete", "race", "score", "cheer", "celebrate", "congratulate",
    "reward", "punish", "blame", "forgive", "forget", "remind", "notice", "observe",
    "examine", "inspect", "check", "verify", "measure", "weigh", "count", "calculate",
    "estimate", "guess", "predict", "assume", "suppose", "imagine", "dream", "wish",
    "prefer", "select", "compare", "match", "fit", "suit", "belong", "own", "borrow",
    "lend", "rent", "trade", "exchange", "replace", "repair", "fix", "damage", "destroy",
    "ruin", "waste", "save", "spend", "earn", "invest", "donate", "share", "divide",
    "separate", "join", "connect", "attach", "detach", "combine", "merge", "split",
    "enter", "exit", "approach", "avoid", "ignore", "face", "confront", "defend", "attack",
    "protect", "rescue", "warn", "threaten", "frighten", "scare", "surprise", "shock",
    "amaze", "impress", "bore", "annoy", "bother", "disturb", "interrupt", "distract",
    "confuse", "clarify", "reveal", "expose", "pretend", "act", "perform", "rehearse",
    "record", "film", "shoot", "edit", "publish", "print", "copy", "paste", "delete",
    "type", "click", "scroll", "download", "upload", "install", "update", "restart",
    "charge", "plug", "unplug", "switch", "light", "burn", "melt", "freeze", "cool",
    "heat", "warm", "dry", "soak", "float", "sink", "drown", "dive", "surf", "sail",
    "row", "paddle", "steer", "park", "crash", "collide", "slip", "slide", "trip",
    "stumble", "fall", "land", "bounce", "roll", "spin", "twist", "rotate", "flip",
    "toss", "kick", "punch", "slap", "knock", "bang", "tap", "ring", "buzz", "beep",
    "whistle", "hum", "snore", "breathe", "sigh", "yawn", "sneeze", "cough", "swallow",
    "chew", "bite", "lick", "kiss", "hug", "cuddle", "marry", "divorce", "date",
    "flirt", "propose", "promise", "swear", "lie", "cheat", "steal", "rob", "arrest",
    "accuse", "charge", "judge", "sentence", "testify", "confess", "deny", "admit",
    "approve", "reject", "refuse", "accept", "obey", "disobey", "permit", "forbid",
    "ban", "cancel", "vote", "elect", "govern", "rule", "manage", "direct", "command",
    "instruct", "assign", "hire", "fire", "quit", "resign", "retire", "employ", "recruit",
    "interview", "apply", "register", "enroll", "attend", "graduate", "lecture", "mention",
    "declare", "announce", "broadcast", "spread", "deliver", "transport", "transfer",
    "laying", "saying", "doing", "going", "wearing", "talking", "standing", "sitting",
    "holding", "eating", "drinking", "looking", "walking", "sleeping",
};

std::unordered_map<std::string, PosTag> build_lexicon() {
  std::unordered_map<std::string, PosTag> lex;
  // verbs inserted second win conflicts; common usage of the shared forms
  // (e.g. "work", "play") leans verbal in questions
  for (const char* w : kNouns) lex[w] = PosTag::kNoun;
  for (const char* w : kVerbs) lex[w] = PosTag::kVerb;
  return lex;
}

bool ends_with(const std::string& s, const char* suffix) {
  const std::size_t n = std::char_traits<char>::length(suffix);
  return s.size() >= n + 2 && s.compare(s.size() - n, n, suffix) == 0;
}

}  // namespace

PosTag lexicon_tagger(const std::string& token) {
  static const std::unordered_map<std::string, PosTag> lexicon = build_lexicon();
  auto it = lexicon.find(token);
  if (it != lexicon.end()) return it->second;
  if (ends_with(token, "ing") || ends_with(token, "ed")) return PosTag::kVerb;
  if (ends_with(token, "tion") || ends_with(token, "ness")) return PosTag::kNoun;
  return PosTag::kOther;
}

}  // namespace videoqg
