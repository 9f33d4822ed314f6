#include "tvn/lexicon.hpp"

namespace tvn {

// Common English words plus the bundled verification prompts. Trigrams of
// these texts form the vocabulary of the synthetic shared semantic map.
const std::vector<std::string_view>& lexicon_texts() {
  static const std::vector<std::string_view> kTexts = {
      // verification prompts
      "A photo of a cat.", "A bird flying in the sky.", "A bunch of purple grapes.",
      "A close-up of a cat's face.", "A bird soaring above the clouds.",
      "Purple grapes on a vine.", "A cat lying in the sun.",
      "A bird gliding through a clear sky.", "A cluster of purple grapes on a table.",
      "A cat playing with a ball of yarn.", "A tree on the field.",
      // function words
      "a", "an", "the", "of", "in", "on", "at", "to", "with", "by", "for", "from", "and",
      "or", "is", "are", "was", "its", "it", "this", "that", "these", "those", "over",
      "under", "above", "below", "near", "through", "into", "onto", "between", "behind",
      "beside", "around", "across", "along", "against", "up", "down", "out", "off",
      "some", "two", "three", "many", "few", "one", "his", "her", "their", "our",
      // animals
      "cat", "cats", "kitten", "dog", "dogs", "puppy", "bird", "birds", "eagle", "owl",
      "horse", "cow", "sheep", "fish", "lion", "tiger", "bear", "fox", "wolf", "deer",
      "rabbit", "mouse", "duck", "frog", "snake", "monkey", "elephant", "giraffe",
      "zebra", "panda", "butterfly", "bee",
      // objects and food
      "grape", "grapes", "apple", "apples", "orange", "banana", "lemon", "bread",
      "cake", "cup", "coffee", "tea", "bowl", "plate", "table", "chair", "bed", "sofa",
      "lamp", "book", "books", "clock", "car", "truck", "bus", "train", "bicycle",
      "boat", "ship", "airplane", "plane", "bulldozer", "ball", "yarn", "vase",
      "flower", "flowers", "rose", "tree", "trees", "vine", "leaf", "leaves", "grass",
      "window", "door", "house", "building", "bridge", "tower", "castle", "road",
      "street", "city", "town", "village", "garden", "park", "room", "kitchen",
      // nature
      "sky", "cloud", "clouds", "sun", "moon", "star", "stars", "rain", "snow",
      "river", "lake", "sea", "ocean", "beach", "mountain", "mountains", "hill",
      "forest", "field", "desert", "island", "water", "fire", "light", "shadow",
      "night", "morning", "evening", "sunset", "sunrise", "winter", "summer",
      // people
      "man", "woman", "child", "boy", "girl", "people", "person", "face", "hand",
      "portrait", "smile",
      // attributes
      "red", "blue", "green", "yellow", "purple", "white", "black", "brown", "gray",
      "pink", "golden", "silver", "big", "small", "large", "little", "old", "young",
      "new", "bright", "dark", "clear", "soft", "beautiful", "cute", "happy", "quiet",
      "tall", "wide", "long", "round", "wooden", "fresh", "ripe", "fluffy",
      // verbs and scene words
      "flying", "soaring", "gliding", "lying", "playing", "running", "sitting",
      "standing", "walking", "sleeping", "eating", "swimming", "jumping", "looking",
      "holding", "reading", "painting", "photo", "picture", "image", "drawing",
      "view", "scene", "close-up", "bunch", "cluster", "group", "pile", "side",
      "top", "front", "back", "middle", "center", "style", "art", "detailed",
      "realistic", "high", "quality", "thing", "things", "world", "time", "day",
  };
  return kTexts;
}

}  // namespace tvn
