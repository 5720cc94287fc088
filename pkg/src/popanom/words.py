"""Bundled lowercase wordlist for the benign domain-name generator.

Common English nouns and tech vocabulary, 3 to 10 characters, lowercase
ascii only.  Bundling a fixed list keeps domain generation deterministic
and free of external data dependencies.
"""

WORDS = (
    "able", "account", "acorn", "action", "address", "admin", "agent", "air",
    "alarm", "album", "alert", "alpha", "amber", "anchor", "angle", "answer",
    "apple", "arch", "archive", "arena", "argon", "array", "arrow", "asset",
    "atlas", "atom", "audio", "august", "aurora", "auto", "autumn", "avenue",
    "badge", "baker", "balance", "bamboo", "banner", "barrel", "basil", "basin",
    "basket", "beacon", "bean", "bear", "beech", "bell", "bench", "berry",
    "binary", "birch", "bird", "bison", "blade", "blanket", "blossom", "board",
    "boat", "bolt", "bonus", "book", "boot", "border", "bottle", "boulder",
    "box", "branch", "brass", "bread", "breeze", "brick", "bridge", "bright",
    "bronze", "brook", "brush", "bucket", "buffer", "builder", "bundle", "butter",
    "button", "cabin", "cable", "cactus", "cadet", "cake", "camera", "camp",
    "canal", "candle", "canoe", "canvas", "canyon", "carbon", "card", "cargo",
    "carpet", "castle", "cedar", "cell", "census", "center", "chain", "chair",
    "chalk", "channel", "chart", "cherry", "chess", "chief", "child", "chime",
    "circle", "citron", "city", "claim", "clay", "clerk", "client", "cliff",
    "clock", "cloud", "clover", "coast", "cobalt", "cocoa", "code", "coffee",
    "coin", "college", "colony", "column", "comet", "compass", "console", "copper",
    "coral", "cord", "cork", "corn", "corner", "cotton", "course", "cover",
    "crane", "crate", "cream", "creek", "crest", "cricket", "crown", "crystal",
    "cube", "curve", "cycle", "daisy", "dance", "data", "dawn", "debate",
    "decade", "deck", "deer", "delta", "demo", "depot", "desert", "design",
    "desk", "detail", "device", "dial", "diamond", "digit", "dinner", "dock",
    "doctor", "dollar", "dolphin", "domain", "door", "dragon", "drawer", "dream",
    "drift", "drive", "drum", "dune", "dust", "eagle", "earth", "east",
    "echo", "eclipse", "edge", "editor", "elbow", "elder", "ember", "emerald",
    "empire", "energy", "engine", "envoy", "epoch", "era", "estate", "ether",
    "event", "exit", "fabric", "factor", "falcon", "family", "farm", "feather",
    "fennel", "fern", "ferry", "fiber", "field", "figure", "filter", "finch",
    "fire", "flag", "flame", "flask", "fleet", "flint", "floor", "flora",
    "flour", "flute", "fog", "folder", "forest", "forge", "fork", "form",
    "fort", "forum", "fossil", "fountain", "frame", "friend", "frost", "fruit",
    "galaxy", "garden", "garlic", "gate", "gear", "gem", "general", "ginger",
    "glacier", "glass", "globe", "gold", "goose", "gorge", "grain", "granite",
    "grape", "graph", "grass", "gravel", "green", "grid", "grove", "guard",
    "guest", "guide", "gulf", "habit", "hall", "hammer", "harbor", "harvest",
    "hawk", "hazel", "heart", "hearth", "hedge", "helium", "helmet", "herald",
    "heron", "hill", "hinge", "hollow", "honey", "hook", "horizon", "horse",
    "host", "hotel", "house", "hub", "hunter", "ice", "index", "indigo",
    "ingot", "inlet", "iris", "iron", "island", "ivory", "ivy", "jade",
    "jasmine", "jasper", "journal", "judge", "jungle", "junior", "jupiter", "kernel",
    "kettle", "key", "kiln", "king", "kiosk", "kite", "knight", "label",
    "ladder", "lagoon", "lake", "lamp", "lantern", "larch", "laser", "latch",
    "lattice", "laurel", "lava", "layer", "leaf", "ledger", "lemon", "lens",
    "letter", "level", "library", "lichen", "light", "lilac", "lily", "lime",
    "linen", "link", "lion", "list", "lobby", "lobster", "lock", "locust",
    "lodge", "loft", "logic", "loom", "lotus", "lumber", "lunar", "lynx",
    "magnet", "maple", "marble", "margin", "marina", "market", "marsh", "mask",
    "mast", "matrix", "meadow", "medal", "media", "melon", "member", "memory",
    "mentor", "menu", "mercury", "merit", "mesa", "metal", "meteor", "meter",
    "method", "metro", "mill", "mineral", "mint", "mirror", "mist", "model",
    "module", "monitor", "month", "moon", "morning", "mosaic", "moss", "motor",
    "mountain", "mouse", "museum", "music", "myrtle", "nation", "nebula", "nectar",
    "needle", "neon", "nest", "network", "news", "nickel", "night", "node",
    "north", "notebook", "nova", "nugget", "number", "nutmeg", "oak", "oasis",
    "ocean", "office", "olive", "onion", "onyx", "opal", "orange", "orbit",
    "orchard", "orchid", "order", "organ", "origin", "osprey", "otter", "outlet",
    "owl", "oxide", "oyster", "packet", "paddle", "page", "palace", "palm",
    "panel", "pansy", "panther", "paper", "parcel", "park", "parlor", "parrot",
    "pass", "patch", "path", "patio", "pattern", "peach", "peak", "pearl",
    "pebble", "pecan", "pepper", "perch", "period", "person", "petal", "phase",
    "phoenix", "photo", "piano", "pier", "pigeon", "pillar", "pilot", "pine",
    "pint", "pixel", "place", "plain", "planet", "plank", "plant", "plasma",
    "plate", "plaza", "plum", "pocket", "point", "polar", "pond", "poplar",
    "poppy", "port", "portal", "post", "powder", "power", "prairie", "press",
    "price", "pride", "prime", "print", "prism", "profile", "proton", "proxy",
    "pulse", "pump", "pupil", "purple", "quail", "quarry", "quartz", "queen",
    "query", "quest", "quill", "quilt", "rabbit", "radar", "radio", "radish",
    "raft", "rail", "rain", "ranch", "range", "ranger", "rapid", "raven",
    "record", "reed", "reef", "region", "relay", "report", "resin", "review",
    "ribbon", "rice", "ridge", "ring", "river", "road", "robin", "rocket",
    "room", "root", "rope", "rose", "rover", "ruby", "rudder", "runway",
    "saddle", "saffron", "sage", "sail", "salmon", "salt", "sand", "sapphire",
    "satin", "scale", "scarf", "scene", "school", "scope", "score", "scout",
    "screen", "script", "scroll", "sea", "season", "second", "sector", "seed",
    "senate", "sensor", "sequoia", "server", "shade", "shadow", "shape", "shell",
    "shelter", "shield", "ship", "shore", "signal", "silk", "silver", "singer",
    "siren", "sketch", "slate", "sleeve", "slope", "smith", "snow", "socket",
    "sofa", "solar", "sonar", "sound", "source", "south", "space", "spark",
    "sparrow", "sphere", "spice", "spider", "spiral", "spirit", "sponge", "spool",
    "spoon", "spring", "spruce", "square", "stable", "stack", "stadium", "staff",
    "stage", "stair", "stamp", "star", "state", "station", "statue", "steam",
    "steel", "stem", "stone", "storm", "story", "stream", "street", "string",
    "studio", "subway", "sugar", "suite", "summer", "summit", "sun", "sunset",
    "surf", "swan", "swift", "switch", "symbol", "syrup", "system", "table",
    "tablet", "talent", "tango", "tarpon", "tassel", "tavern", "tea", "team",
    "temple", "tensor", "tent", "terrace", "thistle", "thorn", "thread", "throne",
    "thunder", "ticket", "tiger", "timber", "tin", "tissue", "titan", "token",
    "tomato", "tool", "torch", "tower", "town", "track", "trade", "trail",
    "train", "transit", "treasure", "tree", "trench", "trend", "tribe", "trophy",
    "tropic", "truck", "trumpet", "tulip", "tunnel", "turbine", "turtle", "tutor",
    "twilight", "union", "unit", "valley", "vapor", "vault", "vector", "velvet",
    "vendor", "vessel", "veteran", "victory", "video", "village", "vine", "violet",
    "vista", "volcano", "voyage", "wagon", "walnut", "walrus", "water", "wave",
    "weather", "weaver", "web", "west", "whale", "wharf", "wheat", "wheel",
    "willow", "wind", "window", "winter", "wire", "wolf", "wonder", "wood",
    "worker", "world", "wren", "yard", "yarn", "year", "yellow", "zenith",
    "zephyr", "zebra", "zinc", "zone",
)
