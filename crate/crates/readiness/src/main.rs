fn main() {
    println!("readiness cli placeholder");
}
