fn main() {
    println!("mixloc");
}
