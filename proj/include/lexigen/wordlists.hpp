#pragma once

// Generated by tools/gen_wordlists.py from data/wordlists/. Do not edit.

#include <string_view>

namespace lexigen::wordlists {

inline constexpr std::string_view kSpanishFunctionWords[] = {
    "el", "la", "los", "las", "lo", "un", "una", "unos", "unas", "al", "del", "a", "ante",
    "bajo", "cabe", "con", "contra", "de", "desde", "durante", "en", "entre", "hacia", "hasta",
    "mediante", "para", "por", "según", "sin", "so", "sobre", "tras", "versus", "vía", "y", "e",
    "ni", "o", "u", "pero", "mas", "sino", "aunque", "porque", "pues", "que", "si", "como",
    "cuando", "donde", "mientras", "conque", "luego", "yo", "tú", "vos", "usted", "él", "ella",
    "ello", "nosotros", "nosotras", "vosotros", "vosotras", "ustedes", "ellos", "ellas", "me",
    "te", "se", "nos", "os", "le", "les", "mí", "ti", "sí", "conmigo", "contigo", "consigo",
    "mi", "mis", "tu", "tus", "su", "sus", "nuestro", "nuestra", "nuestros", "nuestras",
    "vuestro", "vuestra", "vuestros", "vuestras", "suyo", "suya", "suyos", "suyas", "este",
    "esta", "estos", "estas", "esto", "ese", "esa", "esos", "esas", "eso", "aquel", "aquella",
    "aquellos", "aquellas", "aquello", "qué", "quién", "quiénes", "cuál", "cuáles", "cuánto",
    "cuánta", "cuántos", "cuántas", "cómo", "dónde", "cuándo", "quien", "quienes", "cual",
    "cuales", "cuyo", "cuya", "cuyos", "cuyas", "algo", "alguien", "alguno", "alguna",
    "algunos", "algunas", "algún", "nada", "nadie", "ninguno", "ninguna", "ningún", "otro",
    "otra", "otros", "otras", "todo", "toda", "todos", "todas", "mucho", "mucha", "muchos",
    "muchas", "poco", "poca", "pocos", "pocas", "cada", "varios", "varias", "mismo", "misma",
    "mismos", "mismas", "tal", "tales", "tan", "tanto", "tanta", "tantos", "tantas", "más",
    "menos", "muy", "ya", "aún", "aun", "también", "tampoco", "no", "nunca", "siempre", "solo",
    "sólo", "bien", "mal", "así", "casi", "después", "antes", "ahora", "entonces", "aquí",
    "allí", "ahí", "es", "son", "era", "eran", "fue", "fueron", "ser", "sido", "siendo", "está",
    "están", "estar", "estaba", "estado", "ha", "han", "he", "has", "hemos", "haber", "había",
    "hay", "habido", "puede", "pueden", "suele",
};

inline constexpr std::string_view kEnglishFunctionWords[] = {
    "the", "an", "a", "of", "to", "in", "on", "at", "by", "for", "with", "from", "into", "onto",
    "upon", "about", "above", "across", "after", "against", "along", "among", "around",
    "before", "behind", "below", "beneath", "beside", "between", "beyond", "during", "except",
    "inside", "near", "off", "out", "outside", "over", "since", "through", "throughout", "till",
    "toward", "towards", "under", "underneath", "until", "up", "within", "without", "and",
    "but", "or", "nor", "so", "yet", "because", "although", "though", "unless", "whereas",
    "whether", "while", "if", "than", "that", "which", "who", "whom", "whose", "what", "when",
    "where", "why", "how", "whatever", "whoever", "i", "me", "my", "mine", "myself", "you",
    "your", "yours", "yourself", "he", "him", "his", "himself", "she", "her", "hers", "herself",
    "it", "its", "itself", "we", "us", "our", "ours", "ourselves", "they", "them", "their",
    "theirs", "themselves", "this", "these", "those", "some", "any", "each", "every", "either",
    "neither", "both", "all", "few", "many", "much", "more", "most", "other", "another", "such",
    "own", "same", "no", "not", "none", "nothing", "something", "anything", "everything",
    "someone", "anyone", "everyone", "nobody", "somebody", "anybody", "everybody", "is", "are",
    "was", "were", "be", "been", "being", "am", "have", "has", "had", "having", "do", "does",
    "did", "done", "doing", "will", "would", "shall", "should", "can", "could", "may", "might",
    "must", "ought", "very", "too", "also", "just", "only", "even", "still", "already",
    "always", "never", "often", "sometimes", "usually", "here", "there", "now", "then", "again",
    "once", "ever", "quite", "rather", "almost", "really", "well", "however", "therefore",
    "thus", "instead", "perhaps", "maybe", "used", "way", "thing", "things", "person", "people",
    "kind", "type", "act", "one", "ones",
};

} // namespace lexigen::wordlists
