// Bundled word -> UPOS table for the built-in tagger. Covers closed-class words
// and the open-class words that dominate caption corpora; anything else falls
// through to the suffix heuristics.

#include <string_view>
#include <unordered_map>

#include "divkit/textproc.hpp"

namespace divkit {

namespace {

struct Entry {
  Upos tag;
  const char* words;  // space separated
};

constexpr Entry kEntries[] = {
    {Upos::DET, "a an the this that these those some any each every no another both all either neither which what "
                "whatever whose"},
    {Upos::PRON, "i me my mine myself you your yours yourself he him his himself she her hers herself it its itself "
                 "we us our ours ourselves they them their theirs themselves who whom someone somebody something "
                 "everyone everybody everything anyone anybody anything nobody nothing one ones"},
    {Upos::ADP, "in on at of to with by for from into onto over under near behind beside besides between through "
                "across along around about against down up out off inside outside above below toward towards after "
                "before during like upon within without past beyond beneath underneath among amongst via per than "
                "throughout alongside atop"},
    {Upos::CCONJ, "and or but nor yet &"},
    {Upos::SCONJ, "while because if although though whereas since until unless whether as"},
    {Upos::AUX, "is are was were be been being am 'm 're 's do does did has have had having will would 'll 'd can ca "
                "could may might must shall should wo 've"},
    {Upos::PART, "not n't"},
    {Upos::ADV, "very too also just then there here now quickly slowly together away again still really almost back "
                "even only well ever never always often sometimes so how when where why fast hard carefully "
                "outdoors indoors forward backward backwards upward downward nearby rather quite soon later once "
                "twice maybe perhaps already yet"},
    {Upos::INTJ, "oh yes hello hi wow"},
    {Upos::NUM, "zero two three four five six seven eight nine ten eleven twelve thirteen fifteen twenty thirty forty "
                "fifty hundred thousand million"},
    {Upos::ADJ, "big small large little young old new good bad red blue green yellow black white brown pink purple "
                "orange gray grey dark light long short tall happy sad other many few several different same "
                "beautiful pretty huge tiny hot cold wooden empty full busy clean dirty first second third last next "
                "funny cute asian african american indian chinese japanese male female front top bottom middle "
                "various colorful wet dry heavy high low open closed own great nice fresh whole half main local "
                "professional giant wild real"},
    {Upos::VERB,
     "run runs ran walk walks sit sits sat stand stands stood play plays ride rides rode eat eats ate cook cooks cut "
     "cuts talk talks sing sings sang dance dances drive drives drove hold holds held look looks make makes made put "
     "puts take takes took taken give gives gave given get gets got go goes went gone come comes came show shows "
     "shown fly flies flew swim swims swam jump jumps throw throws threw thrown catch catches caught hit hits kick "
     "kicks read reads wear wears wore worn lay lays lie lies fall falls fell fallen slice slices pour pours mix "
     "mixes add adds peel peels fry fries chop chops use uses watch watches speak speaks spoke spoken write writes "
     "wrote written draw draws drew drawn try tries stir stirs place places move moves pull pulls push pushes open "
     "opens close closes turn turns fight fights fought climb climbs carry carries pet pets feed feeds lift lifts "
     "shoot shoots shot sleep sleeps slept drink drinks drank smile smiles laugh laughs cry cries sits see sees saw "
     "seen wash washes brush brushes paint paints bake bakes boil boils serve serves park parks race races skate "
     "skates ski skis surf surfs fish fishes perform performs explain explains demonstrate demonstrates prepare "
     "prepares apply applies roll rolls stretch stretches attempt attempts lead leads led bite bites chase chases "
     "dive dives kiss kisses hug hugs knit knits sew sews spread spreads squeeze squeezes wipe wipes break breaks "
     "broke broken build builds built fix fixes point points wave waves shake shakes shook begin begins began "
     "sliced poured mixed peeled fried chopped cooked walked played looked jumped danced talked"},
    {Upos::NOUN, "thing things building buildings ceiling ceilings ring rings string strings king kings wedding "
                 "weddings evening morning clothing spring swing swings bed beds shed sled seed seeds speed "
                 "painting paintings ping ding pudding stuffing icing frosting filling stocking stockings "
                 "man men woman women boy boys girl girls person people dog dogs cat cats child children kid kids "
                 "baby group car cars water food table street field ball game guitar video bowl pan kitchen"},
    {Upos::PUNCT, ". , ; : ! ? ( ) [ ] { } \" ' ` `` '' - -- ... /"},
};

const std::unordered_map<std::string_view, Upos>& table() {
  static const auto* t = [] {
    auto* m = new std::unordered_map<std::string_view, Upos>();
    for (const auto& e : kEntries) {
      std::string_view words(e.words);
      std::size_t pos = 0;
      while (pos < words.size()) {
        std::size_t end = words.find(' ', pos);
        if (end == std::string_view::npos) end = words.size();
        if (end > pos) m->emplace(words.substr(pos, end - pos), e.tag);  // first entry wins
        pos = end + 1;
      }
    }
    return m;
  }();
  return *t;
}

}  // namespace

std::optional<Upos> lexicon_lookup(std::string_view word) {
  const auto& t = table();
  if (auto it = t.find(word); it != t.end()) return it->second;
  return std::nullopt;
}

}  // namespace divkit
